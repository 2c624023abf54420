"""
SurvEff Modules Package
RMST versus proportional-hazards testing for two-arm survival trials
"""

__version__ = "1.0.0"
