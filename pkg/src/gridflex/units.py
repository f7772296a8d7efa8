"""Unit conventions and conversions.

Internal units everywhere: kJ, kW, degrees Celsius, seconds.  Fahrenheit is
accepted at ingestion boundaries (CSV headers, configs) and converted once.
"""

KJ_PER_KWH = 3600.0


def fahrenheit_to_celsius(tf):
    return (tf - 32.0) * (5.0 / 9.0)


def celsius_to_fahrenheit(tc):
    return tc * 9.0 / 5.0 + 32.0


def fahrenheit_delta_to_celsius(dtf):
    """Convert a temperature *difference* (band width), not an absolute level."""
    return dtf * (5.0 / 9.0)


def kwh_to_kj(e):
    return e * KJ_PER_KWH


def kj_to_kwh(e):
    return e / KJ_PER_KWH
