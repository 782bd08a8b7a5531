# Constants, all in SI units
MU_EARTH = 3.986004418e14  # m^3/s^2
EARTH_RADIUS = 6371.0e3  # spherical Earth, m
SPEED_OF_LIGHT = 299792458.0  # m/s
SECONDS_PER_DAY = 86400.0

# Linear GMST model, degrees
GMST_AT_J2000_DEG = 280.46061837
GMST_RATE_DEG_PER_DAY = 360.98564736629
