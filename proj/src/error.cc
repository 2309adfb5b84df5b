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

#include "d3tw/error.h"

namespace d3tw {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kDegenerateInput: return "degenerate input";
    case ErrorCode::kInfeasibleShape: return "infeasible shape";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kInvalidCache: return "invalid cache";
    case ErrorCode::kOracleTooLarge: return "oracle too large";
    case ErrorCode::kEmptyPool: return "empty pool";
    case ErrorCode::kDegeneratePositive: return "degenerate positive";
    case ErrorCode::kInvalidPositive: return "invalid positive";
    case ErrorCode::kSamplingFailure: return "sampling failure";
    case ErrorCode::kInconsistentAnnotation: return "inconsistent annotation";
    case ErrorCode::kNoCandidate: return "no candidate";
    case ErrorCode::kMissingFile: return "missing file";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kUnknownAction: return "unknown action";
    case ErrorCode::kInconsistentLength: return "inconsistent length";
  }
  return "unknown error";
}

}  // namespace d3tw
