"""Bayesian attacks on repeated additive spread-spectrum watermarks.

Given only watermarked signal vectors y_i = x_i + b_i w, recover the hidden
bitstream b and watermark w with a Gibbs sampler (:mod:`ssw_attack.gibbs`) or
a mean-field variational solver (:mod:`ssw_attack.vb`).
"""

__version__ = "0.1.0"
