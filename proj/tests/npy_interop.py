# Copyright 2026 The eta-decompose Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Byte-level NPY compatibility with numpy."""

import os
import subprocess
import sys
import tempfile

import numpy as np

tool = sys.argv[1]
failures = 0


def check(cond, what):
    global failures
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures += 1


with tempfile.TemporaryDirectory() as tmp:
    rng = np.random.default_rng(0)
    cases = {
        "f64_2d": rng.standard_normal((7, 5)),
        "f32_2d": rng.standard_normal((3, 1024)).astype(np.float32),
        "f64_1d": rng.standard_normal(192),
        "f32_1d": rng.standard_normal(1).astype(np.float32),
        "f64_wide": rng.standard_normal((1, 3)),
        "f64_empty": np.zeros((0, 3)),
        "f64_special": np.array([0.0, -0.0, 1e-310, 1.7976931348623157e308]),
    }
    for name, arr in cases.items():
        src = os.path.join(tmp, name + ".npy")
        dst = os.path.join(tmp, name + "_copy.npy")
        np.save(src, arr)
        proc = subprocess.run([tool, "copy", src, dst], capture_output=True, text=True)
        check(proc.returncode == 0, f"{name}: read by the toolkit {proc.stderr.strip()}")
        if proc.returncode == 0:
            with open(src, "rb") as a, open(dst, "rb") as b:
                check(a.read() == b.read(), f"{name}: rewritten bytes match numpy")

    bad = os.path.join(tmp, "i4.npy")
    np.save(bad, np.arange(4, dtype=np.int32))
    proc = subprocess.run([tool, "copy", bad, bad + ".out"], capture_output=True, text=True)
    check(proc.returncode == 1 and "UnsupportedDtype" in proc.stderr, "int32 rejected")
    fortran = os.path.join(tmp, "fortran.npy")
    np.save(fortran, np.asfortranarray(rng.standard_normal((3, 2))))
    proc = subprocess.run([tool, "copy", fortran, fortran + ".out"], capture_output=True, text=True)
    check(proc.returncode == 1 and "UnsupportedDtype" in proc.stderr, "fortran order rejected")
    rank3 = os.path.join(tmp, "rank3.npy")
    np.save(rank3, np.zeros((2, 2, 2)))
    proc = subprocess.run([tool, "copy", rank3, rank3 + ".out"], capture_output=True, text=True)
    check(proc.returncode == 1 and "ShapeRankError" in proc.stderr, "rank 3 rejected")

    subprocess.run([tool, "emit", tmp], check=True)
    expect = np.arange(3)[:, None] * 10 + np.arange(4)[None, :] + 0.25
    m64 = np.load(os.path.join(tmp, "m_f64.npy"))
    check(m64.dtype == np.float64 and np.array_equal(m64, expect), "f64 matrix loads in numpy")
    m32 = np.load(os.path.join(tmp, "m_f32.npy"))
    check(m32.dtype == np.float32 and np.array_equal(m32, expect.astype(np.float32)),
          "f32 matrix loads in numpy")
    v = np.load(os.path.join(tmp, "v_f64.npy"))
    check(v.shape == (5,) and np.array_equal(v, np.linspace(-1, 1, 5)), "vector loads in numpy")

sys.exit(1 if failures else 0)
