import copy

import yaml

from src.errors import ScenarioError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


class ConfigManager:

    def __init__(self, config_path: str = "configs/scenario.yaml"):
        """
        :param config_path: str -- Path to the scenario (yaml) file
        """
        self._config_path = config_path

        self._config: dict = self.load_config()

    @property
    def config_path(self) -> str:
        return self._config_path

    @property
    def config(self) -> dict:
        return self._config

    def load_config(self) -> dict:
        """Loads YAML configuration file as a dict."""
        try:
            with open(self._config_path, "r") as yamlfile:
                logger.info(f"Loading yaml file at '{self._config_path}' ...")
                config = yaml.safe_load(yamlfile)
        except FileNotFoundError:
            raise FileNotFoundError(f"File {self._config_path} not found!")
        except PermissionError:
            raise PermissionError(f"Insufficient permission to read {self._config_path}!")
        except IsADirectoryError:
            raise IsADirectoryError(f"{self._config_path} is a directory!")
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark or exc.context_mark
            line, column = (mark.line + 1, mark.column + 1) if mark else (None, None)
            raise ScenarioError(f"YAML parse error in {self._config_path}: {exc.problem}", line=line, column=column)
        except yaml.YAMLError as exc:
            raise ScenarioError(f"YAML parse error in {self._config_path}: {exc}")

        if config is None:
            config = {}
        if not isinstance(config, dict):
            raise ScenarioError(f"Top level of {self._config_path} must be a mapping")
        return config

    def with_overrides(self, overrides: dict) -> dict:
        """
        Returns a copy of the configuration with dotted-path overrides applied,
        e.g. ``{"mission.samples": 24}``. ``None`` values are ignored.
        """
        config = copy.deepcopy(self._config)
        for path, value in overrides.items():
            if value is None:
                continue
            *parents, key = path.split(".")
            node = config
            for parent in parents:
                node = node.setdefault(parent, {})
                if not isinstance(node, dict):
                    raise ScenarioError("Cannot override inside a non-mapping block", field=path)
            node[key] = value
            logger.info(f"Override '{path}' = {value!r}")
        return config


def check_keys(block: dict, allowed: set, path: str) -> None:
    """Strict mode: rejects keys that are not part of the block's schema."""
    if not isinstance(block, dict):
        raise ScenarioError("Expected a mapping", field=path)
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ScenarioError(f"Unknown key(s) {unknown}", field=path)
