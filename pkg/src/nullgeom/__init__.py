"""Codimension-two null geometry in static spherically symmetric spacetimes.

Curvature identities, Heintze-Karcher-type inequalities and null flows for
closed spacelike surfaces of codimension two, together with the mixed
symmetric-function algebra and conformal Killing-Yano machinery they rest on.
"""

__version__ = "0.1.0"
