#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xcoupler::cli {

// Exit codes: 0 success, 1 data/model error, 2 usage error.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
// Same, with args excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xcoupler::cli
