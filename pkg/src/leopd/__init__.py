"""Discrete-event simulator for PDCP packet duplication over two-satellite LEO multi-connectivity."""

__version__ = "0.1.0"
