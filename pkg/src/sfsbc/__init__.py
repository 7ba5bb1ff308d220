"""Shape from shading with boundary-condition anchors."""
