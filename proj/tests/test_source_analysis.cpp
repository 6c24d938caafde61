#include "kvet/source_analysis.hpp"

#include "support/fixtures.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <set>

using namespace kvet;
using kvet::testing::Rng;

TEST_CASE("ddc extraction finds CONFIG_ tokens in descriptions") {
    auto ddc = extract_ddc(
        "The timer_create syscall implementation does not validate sigevent fields, "
        "reachable via /proc/$PID/timers on kernels built with CONFIG_POSIX_TIMERS and "
        "CONFIG_CHECKPOINT_RESTORE.");
    CHECK(ddc == std::set<std::string>{"POSIX_TIMERS", "CHECKPOINT_RESTORE"});
}

TEST_CASE("ddc of config-free text is empty") {
    CHECK(extract_ddc("A use-after-free in the DCCP socket teardown path.").empty());
    CHECK(extract_ddc("").empty());
}

TEST_CASE("duplicated tokens collapse to one symbol") {
    auto ddc = extract_ddc("needs CONFIG_FOO; really CONFIG_FOO. Not MYCONFIG_BAR though.");
    CHECK(ddc == std::set<std::string>{"FOO"});
}

TEST_CASE("path extraction from descriptions") {
    auto paths = extract_paths("A bug in net/netfilter/x_tables.c and fs/ext4/inode.c (see "
                               "also include/linux/skbuff.h).");
    CHECK(paths == std::vector<std::string>{"net/netfilter/x_tables.c", "fs/ext4/inode.c",
                                            "include/linux/skbuff.h"});
}

TEST_CASE("dpc on the netfilter fixture finds both gates") {
    auto tree = kvet::testing::netfilter_mini_tree();
    auto dpc = resolve_dpc(tree, "net/netfilter/x_tables.c");
    CHECK(dpc == std::set<std::string>{"NETFILTER", "NETFILTER_XTABLES"});
}

TEST_CASE("file included unconditionally at every level has no path configs") {
    MemoryTree tree;
    tree.put("Makefile", "obj-y += lib/\n");
    tree.put("lib/Makefile", "obj-y += helper.o\n");
    tree.put("lib/helper.c", "int x;\n");
    CHECK(resolve_dpc(tree, "lib/helper.c").empty());
}

TEST_CASE("composite object indirection is resolved one level deep") {
    MemoryTree tree;
    tree.put("Makefile", "obj-y += drv/\n");
    tree.put("drv/Makefile",
             "obj-$(CONFIG_WIDGET) += widget.o\n"
             "widget-y := core.o io.o\n");
    tree.put("drv/core.c", "int x;\n");
    CHECK(resolve_dpc(tree, "drv/core.c") == std::set<std::string>{"WIDGET"});
}

TEST_CASE("missing makefiles skip the level with a warning") {
    MemoryTree tree;
    tree.put("sub/Makefile", "obj-$(CONFIG_ONLY) += thing.o\n");
    tree.put("sub/thing.c", "int x;\n");
    std::vector<std::string> warnings;
    auto dpc = resolve_dpc(tree, "sub/thing.c", &warnings);
    CHECK(dpc == std::set<std::string>{"ONLY"});
    REQUIRE(warnings.size() == 1); // no root-level Makefile
}

TEST_CASE("headers contribute no path configs") {
    auto tree = kvet::testing::netfilter_mini_tree();
    CHECK(resolve_dpc(tree, "include/linux/netfilter.h").empty());
}

namespace {

struct PlantedTree {
    MemoryTree tree;
    std::string file;
    std::set<std::string> gates; // planted gating symbols
};

// Each directory level gates its child with a fresh config or includes it
// unconditionally; the leaf object is sometimes reached through a
// composite object.
PlantedTree plant_gated_tree(Rng& rng, int salt) {
    PlantedTree out;
    int depth = rng.range(1, 3);
    std::string dir;
    std::string child_needle;

    std::vector<std::string> dirs;
    for (int level = 0; level <= depth; ++level)
        dirs.push_back(level == 0 ? "" : dirs[level - 1] + "sub" + std::to_string(level) + "/");
    out.file = dirs[depth] + "leaf.c";

    for (int level = 0; level < depth; ++level) {
        std::string makefile;
        std::string child = "sub" + std::to_string(level + 1) + "/";
        if (rng.chance(0.7)) {
            std::string gate = "GATE_" + std::to_string(salt) + "_" + std::to_string(level);
            makefile = "obj-$(CONFIG_" + gate + ") += " + child + "\n";
            out.gates.insert(gate);
        } else {
            makefile = "obj-y += " + child + "\n";
        }
        out.tree.put(dirs[level] + "Makefile", makefile);
    }

    std::string leaf_makefile;
    if (rng.chance(0.6)) {
        std::string gate = "GATE_" + std::to_string(salt) + "_LEAF";
        out.gates.insert(gate);
        if (rng.chance(0.4)) {
            leaf_makefile = "obj-$(CONFIG_" + gate + ") += bundle.o\n"
                            "bundle-y := leaf.o extra.o\n";
        } else {
            leaf_makefile = "obj-$(CONFIG_" + gate + ") += leaf.o\n";
        }
    } else {
        leaf_makefile = "obj-y += leaf.o\n";
    }
    out.tree.put(dirs[depth] + "Makefile", leaf_makefile);
    out.tree.put(out.file, "int leaf;\n");
    return out;
}

// Minimal independent build-inclusion evaluator for the planted layout:
// a path component is pulled in when some rule active under `enabled`
// names it (directly or through one composite).
bool object_included(const MemoryTree& tree, const std::string& file,
                     const std::set<std::string>& enabled) {
    std::vector<std::string> parts;
    size_t pos = 0;
    while (true) {
        size_t slash = file.find('/', pos);
        if (slash == std::string::npos) {
            parts.push_back(file.substr(pos));
            break;
        }
        parts.push_back(file.substr(pos, slash - pos));
        pos = slash + 1;
    }
    std::string object = parts.back().substr(0, parts.back().size() - 2) + ".o";

    std::string dir;
    for (size_t level = 0; level < parts.size(); ++level) {
        bool leaf = level + 1 == parts.size();
        std::string needle = leaf ? object : parts[level] + "/";
        auto makefile = tree.read(dir + "Makefile");
        if (!makefile)
            return false;
        bool pulled = false;
        for (const auto& line : split_lines(*makefile)) {
            bool active = false;
            std::string rhs;
            if (line.rfind("obj-y", 0) == 0) {
                active = true;
                rhs = line.substr(line.find('=') + 1);
            } else if (line.rfind("obj-$(CONFIG_", 0) == 0) {
                auto close = line.find(')');
                active = enabled.count(line.substr(13, close - 13)) > 0;
                rhs = line.substr(line.find('=') + 1);
            } else {
                continue;
            }
            if (!active)
                continue;
            if (rhs.find(" " + needle) != std::string::npos ||
                rhs.find("=" + needle) != std::string::npos)
                pulled = true;
            // one composite hop
            if (leaf && rhs.find("bundle.o") != std::string::npos) {
                auto bundle = split_lines(*makefile);
                for (const auto& bl : bundle)
                    if (bl.rfind("bundle-y", 0) == 0 && bl.find(needle) != std::string::npos)
                        pulled = true;
            }
        }
        if (!pulled)
            return false;
        if (!leaf)
            dir += parts[level] + "/";
    }
    return true;
}

} // namespace

TEST_CASE("dpc equals the exhaustive subset oracle on planted trees") {
    Rng rng(59);
    for (int round = 0; round < 120; ++round) {
        auto planted = plant_gated_tree(rng, round);
        std::vector<std::string> universe(planted.gates.begin(), planted.gates.end());
        REQUIRE(universe.size() <= 8);

        // necessary = symbols present in every subset that builds the file
        std::set<std::string> necessary(universe.begin(), universe.end());
        bool any_included = false;
        for (size_t mask = 0; mask < (size_t(1) << universe.size()); ++mask) {
            std::set<std::string> enabled;
            for (size_t bit = 0; bit < universe.size(); ++bit)
                if (mask & (size_t(1) << bit))
                    enabled.insert(universe[bit]);
            if (!object_included(planted.tree, planted.file, enabled))
                continue;
            any_included = true;
            for (auto it = necessary.begin(); it != necessary.end();)
                it = enabled.count(*it) ? std::next(it) : necessary.erase(it);
        }
        REQUIRE(any_included);

        auto got = resolve_dpc(planted.tree, planted.file);
        CHECK(got == necessary);
        CHECK(got == planted.gates);

        // soundness: never report symbols absent from the walked makefiles
        for (const auto& sym : got)
            CHECK(planted.gates.count(sym));
    }
}

TEST_CASE("dcc finds the compat guard around the modified lines") {
    auto tree = kvet::testing::netfilter_mini_tree();
    // lines 28-30 are the three deleted padding lines, inside the guard
    auto dcc = resolve_dcc(tree, "net/netfilter/x_tables.c", {28, 29, 30});
    CHECK(dcc == std::set<std::string>{"COMPAT"});
}

TEST_CASE("dcc outside every conditional is empty") {
    auto tree = kvet::testing::netfilter_mini_tree();
    auto dcc = resolve_dcc(tree, "net/netfilter/x_tables.c", {8});
    CHECK(dcc.empty());
}

namespace {

// naive re-scan oracle handling only #ifdef/#ifndef/#else/#endif: the
// state at a code line is whatever the directives strictly above it left
// on the stack
std::set<std::string> naive_dcc(const std::vector<std::string>& lines, int target) {
    std::vector<std::pair<std::string, bool>> stack; // (symbol, contributes)
    for (int i = 0; i + 1 < target; ++i) {
        const std::string& line = lines[i];
        if (line.rfind("#ifdef CONFIG_", 0) == 0)
            stack.emplace_back(line.substr(14), true);
        else if (line.rfind("#ifndef", 0) == 0)
            stack.emplace_back("", false);
        else if (line.rfind("#else", 0) == 0 && !stack.empty())
            stack.back().second = false;
        else if (line.rfind("#endif", 0) == 0 && !stack.empty())
            stack.pop_back();
    }
    std::set<std::string> out;
    for (const auto& [sym, active] : stack)
        if (active && !sym.empty())
            out.insert(sym);
    return out;
}

} // namespace

TEST_CASE("nested guards report every enclosing positive symbol") {
    MemoryTree tree;
    std::vector<std::string> lines = {
        "#ifdef CONFIG_A",     // 1
        "int a;",              // 2
        "#ifdef CONFIG_B",     // 3
        "int ab;",             // 4
        "#else",               // 5
        "int a_only;",         // 6
        "#endif",              // 7
        "#ifndef CONFIG_C",    // 8
        "int not_c;",          // 9
        "#endif",              // 10
        "int a_tail;",         // 11
        "#endif",              // 12
        "int plain;",          // 13
    };
    tree.put("x.c", join_lines(lines));

    CHECK(resolve_dcc(tree, "x.c", {4}) == std::set<std::string>{"A", "B"});
    CHECK(resolve_dcc(tree, "x.c", {6}) == std::set<std::string>{"A"}); // else branch drops B
    CHECK(resolve_dcc(tree, "x.c", {9}) == std::set<std::string>{"A"}); // ifndef contributes nothing
    CHECK(resolve_dcc(tree, "x.c", {13}).empty());

    for (int target : {2, 4, 6, 9, 11, 13})
        CHECK(resolve_dcc(tree, "x.c", {target}) == naive_dcc(lines, target));
}

TEST_CASE("if-defined expressions contribute their positive symbols") {
    MemoryTree tree;
    tree.put("y.c", "#if defined(CONFIG_X) && !defined(CONFIG_Y)\n"
                    "int x;\n"
                    "#elif IS_ENABLED(CONFIG_Z)\n"
                    "int z;\n"
                    "#endif\n");
    std::vector<std::string> warnings;
    CHECK(resolve_dcc(tree, "y.c", {2}, &warnings) == std::set<std::string>{"X"});
    CHECK(resolve_dcc(tree, "y.c", {4}) == std::set<std::string>{"Z"});
    REQUIRE_FALSE(warnings.empty()); // the negated Y reference is reported
    CHECK(warnings[0].find("negative condition on Y") != std::string::npos);
}

TEST_CASE("unbalanced directives produce a best-effort result plus warning") {
    MemoryTree tree;
    tree.put("z.c", "#ifdef CONFIG_OPEN\n"
                    "int inside;\n");
    std::vector<std::string> warnings;
    auto dcc = resolve_dcc(tree, "z.c", {2}, &warnings);
    CHECK(dcc == std::set<std::string>{"OPEN"});
    REQUIRE_FALSE(warnings.empty());

    tree.put("w.c", "int before;\n#endif\nint after;\n");
    warnings.clear();
    auto none = resolve_dcc(tree, "w.c", {3}, &warnings);
    CHECK(none.empty());
    REQUIRE_FALSE(warnings.empty());
}
