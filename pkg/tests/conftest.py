from hypothesis import settings

# Numpy-heavy property bodies trip the default per-example deadline on slow
# CI boxes; correctness does not depend on wall time.
settings.register_profile("levylab", deadline=None, max_examples=50)
settings.load_profile("levylab")
