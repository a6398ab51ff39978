import numpy as np
import pytest

from lmap.mesh import TriangleMesh


def make_tetrahedron() -> TriangleMesh:
    positions = [
        (1.0, 1.0, 1.0),
        (1.0, -1.0, -1.0),
        (-1.0, 1.0, -1.0),
        (-1.0, -1.0, 1.0),
    ]
    faces = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    return TriangleMesh(positions, faces)


def make_grid(nx: int, ny: int, spacing: float = 1.0, height=None) -> TriangleMesh:
    """Regular grid in the xy-plane, each cell split along one diagonal.

    ``height`` maps (x, y) -> z; default flat.
    """
    xs = np.arange(nx) * spacing
    ys = np.arange(ny) * spacing
    positions = []
    for j in range(ny):
        for i in range(nx):
            x, y = xs[i], ys[j]
            z = height(x, y) if height is not None else 0.0
            positions.append((x, y, z))
    faces = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            v00 = j * nx + i
            v10 = v00 + 1
            v01 = v00 + nx
            v11 = v01 + 1
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    return TriangleMesh(positions, faces)


BUMP_N = 21
BUMP_HEIGHT = 0.5
BUMP_SIGMA = 1.0


def make_bump(n: int = BUMP_N, height: float = BUMP_HEIGHT, sigma: float = BUMP_SIGMA) -> TriangleMesh:
    """n x n unit grid with a centered Gaussian bump."""
    c = (n - 1) / 2.0

    def z(x, y):
        r2 = (x - c) ** 2 + (y - c) ** 2
        return height * np.exp(-r2 / (2.0 * sigma**2))

    return make_grid(n, n, height=z)


def bump_apex(n: int = BUMP_N) -> int:
    c = (n - 1) // 2
    return c * n + c


def make_torus(nu: int = 12, nv: int = 8, R: float = 2.0, r: float = 0.8) -> TriangleMesh:
    positions = []
    for i in range(nu):
        a = 2.0 * np.pi * i / nu
        for j in range(nv):
            b = 2.0 * np.pi * j / nv
            x = (R + r * np.cos(b)) * np.cos(a)
            y = (R + r * np.cos(b)) * np.sin(a)
            z = r * np.sin(b)
            positions.append((x, y, z))
    faces = []
    for i in range(nu):
        for j in range(nv):
            v00 = i * nv + j
            v01 = i * nv + (j + 1) % nv
            v10 = ((i + 1) % nu) * nv + j
            v11 = ((i + 1) % nu) * nv + (j + 1) % nv
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    return TriangleMesh(positions, faces)


def make_cube() -> TriangleMesh:
    positions = [
        (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
        (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1),
    ]
    faces = [
        (0, 2, 1), (0, 3, 2),  # bottom (z=0, outward -z)
        (4, 5, 6), (4, 6, 7),  # top
        (0, 1, 5), (0, 5, 4),  # y=0
        (1, 2, 6), (1, 6, 5),  # x=1
        (2, 3, 7), (2, 7, 6),  # y=1
        (3, 0, 4), (3, 4, 7),  # x=0
    ]
    return TriangleMesh(positions, faces)


def make_icosahedron() -> TriangleMesh:
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    positions = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    return TriangleMesh(positions, faces)


TETRA_OBJ = (
    "v 1 1 1\n"
    "v 1 -1 -1\n"
    "v -1 1 -1\n"
    "v -1 -1 1\n"
    "f 1 2 3\n"
    "f 1 4 2\n"
    "f 1 3 4\n"
    "f 2 4 3\n"
)


@pytest.fixture
def tetrahedron():
    return make_tetrahedron()


@pytest.fixture
def grid_3x3():
    return make_grid(3, 3)


@pytest.fixture
def bump():
    return make_bump()


@pytest.fixture
def torus():
    return make_torus()
