import hypothesis

# Property tests must be reproducible in CI and fast enough to run on
# every commit; examples are derived from the test name, not wall clock.
hypothesis.settings.register_profile(
    "ci", derandomize=True, deadline=None, max_examples=60)
hypothesis.settings.load_profile("ci")
