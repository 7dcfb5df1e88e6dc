// Copyright 2026 The LCMR Authors
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
#include "lcmr/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "lcmr/error.hpp"

namespace lcmr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

const Parameter& Checkpoint::find(const std::string& name) const {
  for (const Parameter& p : params) {
    if (p.name() == name) return p;
  }
  fail(ErrorKind::kFormat, "checkpoint has no parameter '" + name + "'");
}

void save_checkpoint(const std::filesystem::path& path,
                     const ModelHeader& header,
                     std::span<const Parameter* const> params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << kCheckpointMagic << '\n';
  for (const auto& [key, value] : header) {
    if (key.find_first_of("=\n") != std::string::npos ||
        value.find('\n') != std::string::npos) {
      fail(ErrorKind::kInvalidArgument, "bad checkpoint header key " + key);
    }
    out << key << '=' << value << '\n';
  }
  out << "params=" << params.size() << '\n';
  for (const Parameter* p : params) {
    out << "param " << p->name() << " f64 " << p->shape().size();
    for (std::size_t dim : p->shape()) out << ' ' << dim;
    out << '\n';
    const auto values = p->value();
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
    out << '\n';
  }
  out << "end\n";
  if (!out) fail(ErrorKind::kIo, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  auto bad = [&](const std::string& what) {
    fail(ErrorKind::kFormat, path.string() + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic) {
    bad("not an LCMR1 checkpoint");
  }
  Checkpoint ckpt;
  std::size_t count = 0;
  while (true) {
    if (!std::getline(in, line)) bad("truncated header");
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad("malformed header line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "params") {
      try {
        count = std::stoul(value);
      } catch (const std::logic_error&) {
        bad("bad parameter count");
      }
      break;
    }
    ckpt.header[key] = value;
  }
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line)) bad("truncated parameter list");
    std::istringstream fields(line);
    std::string tag, name, dtype;
    std::size_t rank = 0;
    if (!(fields >> tag >> name >> dtype >> rank) || tag != "param") {
      bad("malformed parameter record '" + line + "'");
    }
    if (dtype != "f64") bad("unsupported dtype " + dtype);
    std::vector<std::size_t> shape(rank);
    for (auto& dim : shape) {
      if (!(fields >> dim)) bad("malformed shape for " + name);
    }
    Parameter p(name, shape);
    auto values = p.value();
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in || in.get() != '\n') bad("truncated data for " + name);
    ckpt.params.push_back(std::move(p));
  }
  if (!std::getline(in, line) || line != "end") bad("missing end marker");
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt,
                        std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    const Parameter& src = ckpt.find(p->name());
    if (src.shape() != p->shape()) {
      fail(ErrorKind::kFormat, "shape mismatch for parameter " + p->name());
    }
    std::copy(src.value().begin(), src.value().end(), p->value().begin());
  }
}

}  // namespace lcmr
