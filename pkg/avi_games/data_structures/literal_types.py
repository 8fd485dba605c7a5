from typing import Literal

Direction = Literal["N", "E", "S", "W"]
Maneuver = Literal["NS", "NE", "NW", "EW", "ES", "EN", "SN", "SW", "SE", "WE", "WN", "WS"]
"""Entry direction followed by exit direction, e.g. ``"NW"`` enters from the north and leaves
to the west."""
