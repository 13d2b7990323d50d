"""Joint planning of electric drayage trucks, charging stations and grid upgrades."""

__version__ = "0.1.0"
