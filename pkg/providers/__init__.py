"""Trust-provider agents and their attack detectors."""
