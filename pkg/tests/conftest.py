from thermalsim import kernels

kernels.warmup()
