"""dlverify: parse, prove, simulate, and falsify hybrid-system properties.

The trusted base is `kernel` together with the `core`, `deriv`, and `arith`
modules it calls; everything else (tactics, simulator, server, CLI) is
untrusted convenience layered on top.
"""

__version__ = "0.1.0"
