"""Numerical toolkit for spectral moments of SL(3) automorphic L-functions."""
