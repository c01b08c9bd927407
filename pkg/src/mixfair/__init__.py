"""Fair allocation of mixed divisible and indivisible goods under binary valuations."""

__version__ = "0.1.0"
