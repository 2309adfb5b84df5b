/* Copyright 2026 The D3TW Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "d3tw/alignment_oracle.h"

#include <algorithm>
#include <limits>
#include <string>

#include "d3tw/error.h"

namespace d3tw {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step.
    const std::uint64_t factor = n - k + i;
    if (result > std::numeric_limits<std::uint64_t>::max() / factor) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * factor / i;
  }
  return result;
}

std::uint64_t count_alignments(std::size_t num_rows, std::size_t num_frames) {
  if (num_rows == 0 || num_frames < num_rows) return 0;
  return binomial(num_frames - 1, num_rows - 1);
}

namespace {

void extend(std::size_t num_rows, std::size_t num_frames, AlignmentPath& prefix,
            std::vector<AlignmentPath>& out) {
  const std::size_t j = prefix.rows.size();
  const std::size_t row = prefix.rows.back();
  if (j == num_frames) {
    if (row == num_rows - 1) out.push_back(prefix);
    return;
  }
  // Stay on the row only if the remaining frames can still reach the last row.
  if (num_frames - j > num_rows - 1 - row) {
    prefix.rows.push_back(row);
    extend(num_rows, num_frames, prefix, out);
    prefix.rows.pop_back();
  }
  if (row + 1 < num_rows) {
    prefix.rows.push_back(row + 1);
    extend(num_rows, num_frames, prefix, out);
    prefix.rows.pop_back();
  }
}

}  // namespace

std::vector<AlignmentPath> enumerate_alignments(std::size_t num_rows, std::size_t num_frames,
                                                std::uint64_t cap) {
  if (num_rows == 0 || num_frames == 0) {
    throw Error(ErrorCode::kInvalidInput, "grid dimensions must be positive");
  }
  if (num_frames < num_rows) {
    throw Error(ErrorCode::kInfeasibleShape, "T < L has no eligible alignment");
  }
  const std::uint64_t count = count_alignments(num_rows, num_frames);
  if (count > cap) {
    throw Error(ErrorCode::kOracleTooLarge,
                std::to_string(count) + " alignments exceed the cap of " + std::to_string(cap));
  }
  std::vector<AlignmentPath> out;
  out.reserve(static_cast<std::size_t>(count));
  AlignmentPath prefix;
  prefix.rows.reserve(num_frames);
  prefix.rows.push_back(0);
  extend(num_rows, num_frames, prefix, out);
  return out;
}

}  // namespace d3tw
