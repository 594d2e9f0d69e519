"""pytest-bdd step definitions: background, convolution, positivity, Levy and CLI steps."""
