// grc/verify.hpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.
//
// Randomized self-checks of the library invariants, small enough to run on
// every install. A named fault can be injected to confirm the checks can
// actually fail.

#ifndef GRC_VERIFY_HPP_
#define GRC_VERIFY_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace grc {

struct VerifyOptions {
  std::uint64_t seed = 20210901;
  std::size_t trials = 200;
  std::string inject_fault;  // name of the check to corrupt deliberately
};

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool AllPass() const;
};

// The known check names, in run order.
std::vector<std::string> VerifyCheckNames();

VerifyReport RunVerify(const VerifyOptions& opts);

}  // namespace grc

#endif  // GRC_VERIFY_HPP_
