// Copyright 2026 The distfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs acceptance criteria 1-13 and prints one line per criterion.
// Criteria listed with --expect-fail are reported as FAIL but do not change
// the exit status; any other failure exits 1.

#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "distfilter/validation.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  unsigned threads = 0;
  std::vector<int> expect_fail;
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
  app.add_option("--expect-fail", expect_fail, "criterion ids known not to hold");
  CLI11_PARSE(app, argc, argv);

  distfilter::ValidationOptions opt;
  opt.threads = threads;
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  const auto results = distfilter::run_acceptance(opt, [](const distfilter::CheckResult& r) {
    std::cout << distfilter::format_check_line(r) << '\n';
    for (const auto& d : r.details) std::cout << "      " << d << '\n';
    std::cout.flush();
  });

  int passed = 0, unexpected = 0;
  std::vector<int> known, fixed;
  for (const auto& r : results) {
    if (r.passed) {
      ++passed;
      if (expected.count(r.id)) fixed.push_back(r.id);
    } else if (expected.count(r.id)) {
      known.push_back(r.id);
    } else {
      ++unexpected;
    }
  }
  std::cout << passed << "/" << results.size() << " criteria passed";
  for (int id : known) std::cout << "; criterion " << id << " failed (expected)";
  for (int id : fixed) std::cout << "; criterion " << id << " passed although listed as expected to fail";
  std::cout << '\n';
  return unexpected == 0 ? 0 : 1;
}
