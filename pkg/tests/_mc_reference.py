"""Frozen Monte Carlo estimates of the MSE function.

Generated by tests/mc_oracle.py (10^7 seeded samples per entry, an
independently coded posterior-mean estimator).  Regenerate with

    python tests/mc_oracle.py

Values: (alphabet, sigma_sq) -> (estimate, standard error).
"""

MC_PSI = {
    ("bpsk", 0.1): (1.0779591303844326e-05, 1.5968746715290884e-06),
    ("bpsk", 1.0): (0.23130396273908416, 0.0002071934185572398),
    ("bpsk", 10.0): (0.8306559263852774, 0.00021535661059624687),
    ("qpsk", 0.1): (0.0024435606184008826, 1.707137993415005e-05),
    ("qpsk", 1.0): (0.44994267695022466, 0.00017987787081383188),
    ("qpsk", 10.0): (0.9085716255576753, 0.00012162127541818532),
    ("16qam", 0.1): (0.06954339825366572, 3.5179938938427635e-05),
    ("16qam", 1.0): (0.48347469472624316, 0.00015196166252217792),
    ("16qam", 10.0): (0.9085807649310853, 0.00019059525016207899),
    ("64qam", 0.1): (0.08214209556562915, 2.7612623674140533e-05),
    ("64qam", 1.0): (0.4868485272514632, 0.00015102010249259693),
    ("64qam", 10.0): (0.9090271790940588, 0.00020131947357413904),
    ("8psk", 0.1): (0.03809136867049442, 3.304093279725742e-05),
    ("8psk", 1.0): (0.46728543805037354, 0.00016341318918507389),
    ("8psk", 10.0): (0.9089460577853202, 0.00012116510719000886),
    ("16psk", 0.1): (0.05141420983745271, 2.3868682918194372e-05),
    ("16psk", 1.0): (0.46743435817962514, 0.00016343040002047814),
    ("16psk", 10.0): (0.9089587257801587, 0.00012112791758100553),
}
