"""
File formats and report serialisation for heatpack
"""
