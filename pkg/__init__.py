"""SurfaceScope: tight triangulations of bordered and model surfaces."""
