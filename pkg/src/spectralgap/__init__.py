"""Random regular digraphs and graphs: uniform sampling, second singular
values, Orlicz norms, tail bounds and the combinatorial statistics used to
certify spectral gaps, plus Monte Carlo drivers that check them."""
__version__ = "0.1.0"
