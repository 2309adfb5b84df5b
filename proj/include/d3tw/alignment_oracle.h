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

// Brute-force enumeration of every eligible alignment. Exponential; meant as
// an independent oracle for the dynamic program at small sizes.

#ifndef D3TW_ALIGNMENT_ORACLE_H_
#define D3TW_ALIGNMENT_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "d3tw/soft_dtw.h"

namespace d3tw {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// Number of eligible alignments of an L x T grid: C(T-1, L-1), or 0 if T < L.
std::uint64_t count_alignments(std::size_t num_rows, std::size_t num_frames);

// All C(T-1, L-1) monotone alignments in lexicographic order of their row
// sequences. Throws kInfeasibleShape when T < L and kOracleTooLarge when the
// count exceeds `cap`.
std::vector<AlignmentPath> enumerate_alignments(std::size_t num_rows, std::size_t num_frames,
                                                std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace d3tw

#endif  // D3TW_ALIGNMENT_ORACLE_H_
