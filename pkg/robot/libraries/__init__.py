"""Robot Framework keyword libraries for dualconv.

The libraries mirror the pytest-bdd step definitions in tests/step_defs/.
Each library uses the @keyword decorator to map clean Python function
names to scenario step text.

Libraries:
    DualconvKeywords: dual semigroups, generators, exponentials, positivity,
        Levy processes and batch jobs

Usage:
    *** Settings ***
    Library    ../libraries/dualconv_keywords.py

    *** Test Cases ***
    Gaussian Fourth Moment
        The Primitive Dual Semigroup On One Generator
        The Gaussian Generator
        The Product    tensor
        ${value}=    Evaluate Convolution Exponential    2.0    x x x x
        Value Should Be    ${value}    12.0
"""
