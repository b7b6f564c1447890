# Tests package for the tandemcal backend
