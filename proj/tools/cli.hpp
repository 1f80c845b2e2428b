#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace yescert::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDiverged = 3, kIoError = 4 };

// Entry point shared by the binary and the tests. `args` excludes argv[0].
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace yescert::cli
