"""Physical constants shared across the simulator."""

SPEED_OF_LIGHT = 299792458.0
"Speed of light in vacuum, m/s."

VACUUM_PERMITTIVITY = 8.8541878128e-12
"Permittivity of free space, F/m."
