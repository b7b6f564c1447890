"""tandemcal - reciprocity calibration simulator."""
