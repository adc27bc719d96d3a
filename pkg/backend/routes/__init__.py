"""Routes package"""
from . import analysis
