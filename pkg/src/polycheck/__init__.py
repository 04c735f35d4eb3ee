"""polycheck: Petri net model checking with polyhedral reductions, BMC and PDR."""
__version__ = "0.1.0"
