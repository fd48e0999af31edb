"""Traffic Observer CLI - command line front end for trafficobs-core."""

__version__ = "0.1.0"
