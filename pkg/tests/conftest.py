import hypothesis

hypothesis.settings.register_profile("efdp", deadline=None, max_examples=50)
hypothesis.settings.load_profile("efdp")
