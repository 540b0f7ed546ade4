# Required for pytest to find tracest correctly
