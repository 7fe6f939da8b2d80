# Copyright 2026 The qreal Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Dense two-setting sweep for the nonlinear signaling probe.

Independent of the C++ code: builds the 16-dimensional singlet-plus-records
state with numpy, integrates the nonlinear equation with scipy's DOP853 at
tight tolerance, and prints Bob's exact P(+) per Alice setting. The printed
values are frozen into the C++ tests.
"""

import numpy as np
from scipy.integrate import solve_ivp

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def measurement(axis):
    nx, ny, nz = axis
    sigma = np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]])
    plus = (I2 + sigma) / 2
    minus = (I2 - sigma) / 2
    return np.kron(plus, I2) + np.kron(minus, X)


def embed(op, targets):
    # Qubits [a, b, ra, rb]; qubit 0 is the most significant bit.
    full = np.zeros((16, 16), dtype=complex)
    for col in range(16):
        bits = [(col >> (3 - q)) & 1 for q in range(4)]
        sub = bits[targets[0]] * 2 + bits[targets[1]]
        for out in range(4):
            amp = op[out, sub]
            if amp == 0:
                continue
            nb = list(bits)
            nb[targets[0]] = out >> 1
            nb[targets[1]] = out & 1
            row = sum(b << (3 - q) for q, b in enumerate(nb))
            full[row, col] += amp
    return full


def grad_conj(psi, g, lam):
    i, j, p = 4, 0, 10
    d = np.zeros(16, dtype=complex)
    cross = np.conj(psi[i]) * psi[j] + np.conj(psi[j]) * psi[i]
    d[p] += g * psi[p] * cross
    d[i] += g * abs(psi[p]) ** 2 * psi[j]
    d[j] += g * abs(psi[p]) ** 2 * psi[i]
    d[i] += lam * (2 * abs(psi[i]) ** 2 * psi[i] + abs(psi[j]) ** 2 * psi[i])
    d[j] += lam * abs(psi[i]) ** 2 * psi[j]
    return d


def bob_plus(alpha, g, lam, duration):
    psi = np.zeros(16, dtype=complex)
    psi[0b0100] = 1 / np.sqrt(2)
    psi[0b1000] = -1 / np.sqrt(2)
    psi = embed(measurement((np.sin(alpha), 0, np.cos(alpha))), (0, 2)) @ psi

    def rhs(_, y):
        z = y[:16] + 1j * y[16:]
        dz = -1j * grad_conj(z, g, lam)
        return np.concatenate([dz.real, dz.imag])

    sol = solve_ivp(rhs, (0, duration), np.concatenate([psi.real, psi.imag]), method="DOP853",
                    rtol=1e-12, atol=1e-14)
    z = sol.y[:16, -1] + 1j * sol.y[16:, -1]
    z = embed(measurement((0, 0, 1)), (1, 3)) @ z
    # Bob's record rb is the least significant bit; P(+) = P(rb = 0).
    return sum(abs(z[k]) ** 2 for k in range(16) if k & 1 == 0)


if __name__ == "__main__":
    g, lam, duration = 2.0, 0.5, 1.0
    values = [bob_plus(a, g, lam, duration) for a in (0.0, np.pi / 2)]
    print("g=%g lambda=%g duration=%g" % (g, lam, duration))
    for a, v in zip(("0", "pi/2"), values):
        print("alice=%s bob_plus=%.12f" % (a, v))
    print("max_tv=%.12f" % abs(values[0] - values[1]))
