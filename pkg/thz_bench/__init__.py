"""thz_bench – THz MIMO channel simulation and one-bit channel-estimation benchmark."""

__version__ = "0.1.0"
