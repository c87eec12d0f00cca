"""orbitlab - boundary orbits of forward compositions of holomorphic maps"""

__version__ = "1.0.0"
__author__ = "orbitlab Team"
