#pragma once

#include <string>

// Downloads the archived WHO surveillance file and/or the OxCGRT compact
// national file into `data_dir`. `what` is "who", "oxcgrt", or "all".
// Returns 0 on success. Never invoked implicitly by any analysis command.
int run_fetch(const std::string& data_dir, const std::string& what);
