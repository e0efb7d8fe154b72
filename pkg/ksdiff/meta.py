__version__ = "0.4"
__author__ = "The ksdiff developers"
