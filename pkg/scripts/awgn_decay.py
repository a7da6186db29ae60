"""Variational distance between BPSK output laws over AWGN as the noise grows.

Prints V(sigma) for sigma in 8..64, the fitted log-log slope and the
closed form erf(1/(sigma sqrt 2)) for comparison.
"""

import math

import numpy as np

from secrecy_lab.channels import GaussianSpec, bpsk_awgn_variational


def main():
    sigmas = np.array([8.0, 16.0, 32.0, 64.0])
    v = np.array([bpsk_awgn_variational(GaussianSpec(s**2)) for s in sigmas])
    for s, x in zip(sigmas, v):
        print(f"sigma {s:5.1f}  V {x:.10f}  erf {math.erf(1 / (s * math.sqrt(2))):.10f}")
    slope = np.polyfit(np.log(sigmas), np.log(v), 1)[0]
    print(f"log-log slope {slope:.4f}")


if __name__ == "__main__":
    main()
