"""The exact face of the model: conditional Gaussians and their matrices.

For a finite volume the conditional law given the boundary is a
multivariate normal truncated to the spin box: precision matrix A with
the kernel norm on the diagonal and minus the coupling off it, mean
solving A m = B gamma.  A is positive definite by an explicit
decomposition into shifted-difference Toeplitz blocks, certified here by
reassembling it entrywise.
"""

import numpy as np

from truncgibbs import (
    SpinInterval,
    build_matrices,
    hamiltonian,
    nearest_neighbor,
    pd_certificate,
    quadratic_form,
    specification,
    toeplitz_matrix,
    toeplitz_quadratic_form,
    z_connected_classes,
)

kernel = nearest_neighbor(1)
volume = [(0,), (1,), (2,)]
vh = build_matrices(volume, kernel)

print("Volume {0, 1, 2}, nearest-neighbor kernel (weight 1/2 per side)")
print("precision A:")
print(vh.precision)
print("cross matrix B (columns are the shell sites", vh.shell, "):")
print(vh.cross)

gamma = np.array([0.0, 1.0])
spec = specification(vh, gamma, SpinInterval(0.0, 1.0))
print()
print(f"boundary gamma = {gamma.tolist()} pins the conditional mean at "
      f"{spec.mean.round(6).tolist()}")
print("covariance:")
print(spec.covariance.round(6))

print()
print("The pair-sum energy and the quadratic form agree configuration by")
print("configuration (same number, two routes):")
rng = np.random.default_rng(1)
for _ in range(3):
    xi = rng.uniform(0, 1, len(volume) + len(vh.shell))
    direct = hamiltonian(vh, xi)
    quad = quadratic_form(vh, xi[:len(volume)], xi[len(volume):])
    print(f"  pair sum {direct:.12f}   quadratic form {quad:.12f}")

print()
cert = pd_certificate(vh)
print(f"Positive-definiteness certificate: slack {cert.slack}, "
      f"{len(cert.terms)} Toeplitz term(s)")
for z, weight, classes in cert.terms:
    print(f"  offset {z}: weight {weight}, progression classes {classes}")
residual = np.max(np.abs(cert.reassemble() - vh.precision))
print(f"  reassembled A entrywise residual: {residual:.1e}")

print()
print("The progression identity behind positivity, on the volume {0, 1, 2, 5}:")
sites = [(0,), (1,), (2,), (5,)]
print("  classes with step 1:", z_connected_classes(sites, (1,)))
eta = np.array([0.3, -0.7, 0.2, 1.1])
by_classes = toeplitz_quadratic_form(sites, (1,), eta)
dense = float(eta @ toeplitz_matrix(sites, (1,)) @ eta)
print(f"  telescoping form {by_classes:.12f} = dense form {dense:.12f} > 0")
