#pragma once

#include "kvet/source_tree.hpp"

#include <set>
#include <string>
#include <vector>

namespace kvet {

/// Direct configs found without the Kconfig graph: description-level,
/// Makefile-path-level and #ifdef-code-level. Symbols are stored without
/// the CONFIG_ prefix; the sets may overlap.
struct DirectConfigs {
    std::set<std::string> ddc;
    std::set<std::string> dpc;
    std::set<std::string> dcc;
    std::vector<std::string> affected_files;
};

// Every CONFIG_[A-Z0-9_]+ token in the text, prefix-stripped.
std::set<std::string> extract_ddc(std::string_view description);

// Path-like tokens (dir/file.c|.S|.h) mentioned in free text.
std::vector<std::string> extract_paths(std::string_view description);

// Configs gating the file's object along the Makefile/Kbuild walk from
// its directory up to the tree root: obj-$(CONFIG_X)/lib-$(CONFIG_X)
// rules naming the object, a composite that includes it via one level of
// <name>-y / <name>-objs indirection, or the subdirectory just descended
// from. Missing makefiles skip that level with a warning.
std::set<std::string> resolve_dpc(const SourceTree& tree, const std::string& file,
                                  std::vector<std::string>* warnings = nullptr);

// Symbols of positive-polarity preprocessor conditions (#ifdef CONFIG_X,
// #if defined(CONFIG_X), IS_ENABLED(...)) open at any of the modified
// 1-based lines. #ifndef and #else branches contribute nothing; negative
// conditions and unbalanced directives are reported as warnings.
std::set<std::string> resolve_dcc(const SourceTree& tree, const std::string& file,
                                  const std::set<int>& lines,
                                  std::vector<std::string>* warnings = nullptr);

} // namespace kvet
