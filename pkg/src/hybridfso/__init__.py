"""Outage and BER analysis of a relay-assisted hybrid FSO/RF uplink.

Subpackages: ``special`` (Meijer-G machinery), ``channels``, ``analytic``,
``simulator`` and the ``cli`` front-end.
"""

__version__ = "0.1.0"
