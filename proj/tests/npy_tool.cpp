// Copyright 2026 The eta-decompose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Helper for the numpy interoperability test.
//   npy_tool copy IN OUT     read IN and write it back out unchanged
//   npy_tool emit DIR        write arrays with known contents

#include <cstdio>
#include <string>

#include "eta/datastore.hpp"
#include "eta/error.hpp"

int main(int argc, char** argv) {
  try {
    const std::string cmd = argc > 1 ? argv[1] : "";
    if (cmd == "copy" && argc == 4) {
      eta::write_array(argv[3], eta::read_array(argv[2]));
      return 0;
    }
    if (cmd == "emit" && argc == 3) {
      const std::filesystem::path dir = argv[2];
      eta::Matrix m(3, 4);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) m(r, c) = r * 10 + c + 0.25;
      }
      eta::write_matrix(dir / "m_f64.npy", m, eta::Precision::kF64);
      eta::write_matrix(dir / "m_f32.npy", m, eta::Precision::kF32);
      eta::write_vector(dir / "v_f64.npy", eta::Vector::LinSpaced(5, -1.0, 1.0), eta::Precision::kF64);
      return 0;
    }
    std::fprintf(stderr, "usage: npy_tool copy IN OUT | emit DIR\n");
    return 2;
  } catch (const eta::Error& e) {
    std::fprintf(stderr, "%s: %s\n", eta::errc_name(e.code()), e.what());
    return 1;
  }
}
