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

#ifndef D3TW_TRANSCRIPT_H_
#define D3TW_TRANSCRIPT_H_

#include <compare>
#include <cstddef>
#include <vector>

namespace d3tw {

using ActionId = int;

// Ordered list of actions occurring in a sequence. Adjacent duplicates are
// allowed and occupy separate rows of the distance matrix.
struct Transcript {
  std::vector<ActionId> actions;

  std::size_t size() const { return actions.size(); }
  ActionId operator[](std::size_t i) const { return actions[i]; }

  auto operator<=>(const Transcript&) const = default;
};

// Throws kInvalidInput if empty or if an id is outside [0, num_actions).
void validate_transcript(const Transcript& transcript, int num_actions);

}  // namespace d3tw

#endif  // D3TW_TRANSCRIPT_H_
