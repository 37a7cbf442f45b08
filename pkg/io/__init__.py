"""Reading and writing SurfaceScope documents."""
