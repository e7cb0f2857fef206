// Copyright 2026 The TumorCP Engine Authors
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

#include "tumorcp/metrics.hpp"

namespace tumorcp {
namespace {

struct Counts {
  std::size_t a = 0, b = 0, both = 0;
};

Counts count(const MaskGrid& a, const MaskGrid& b) {
  if (!(a.dims() == b.dims())) throw Error(ErrorCode::kShapeMismatch, "dice needs equal dims");
  Counts c;
  const auto& av = a.storage();
  const auto& bv = b.storage();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const bool x = av[i] != 0, y = bv[i] != 0;
    c.a += x;
    c.b += y;
    c.both += x && y;
  }
  return c;
}

}  // namespace

double dice(const MaskGrid& a, const MaskGrid& b) {
  const Counts c = count(a, b);
  const std::size_t uni = c.a + c.b - c.both;
  return uni == 0 ? 1.0 : static_cast<double>(c.both) / static_cast<double>(uni);
}

double dice_standard(const MaskGrid& a, const MaskGrid& b) {
  const Counts c = count(a, b);
  return c.a + c.b == 0 ? 1.0 : 2.0 * static_cast<double>(c.both) / static_cast<double>(c.a + c.b);
}

MaskGrid label_mask(const LabelMap& labelmap, Label label) {
  MaskGrid out(labelmap.dims());
  const auto& l = labelmap.labels.storage();
  auto& o = out.storage();
  for (std::size_t i = 0; i < l.size(); ++i) o[i] = l[i] == label;
  return out;
}

}  // namespace tumorcp
