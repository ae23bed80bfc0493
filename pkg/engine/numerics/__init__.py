"""
Numerical kernels for heatpack
"""
