"""coverforge: partitions of unity, cover decomposition certificates,
Lebesgue-number rescaling, and descent checks for presheaves of rational
cochain complexes."""

__version__ = "0.1.0"
