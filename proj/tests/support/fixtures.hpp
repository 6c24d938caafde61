#pragma once

// A miniature netfilter-shaped kernel tree: one compat-guarded source
// file, the Makefile chain gating it, and the Kconfig chain with a menu
// block. Mirrors the layout around net/netfilter/x_tables.c closely
// enough to exercise every analysis stage.

#include "kvet/patch.hpp"
#include "kvet/profile.hpp"
#include "kvet/source_tree.hpp"

#include <string>

namespace kvet::testing {

inline std::string xtables_source_vulnerable() {
    return "#include <linux/kernel.h>\n"
           "#include <linux/netfilter/x_tables.h>\n"
           "\n"
           "struct xt_target *xt_find_target(const char *name)\n"
           "{\n"
           "\tstruct xt_target *target;\n"
           "\n"
           "\ttarget = lookup_target(name);\n"
           "\treturn target;\n"
           "}\n"
           "\n"
           "#ifdef CONFIG_COMPAT\n"
           "void xt_compat_target_from_user(struct xt_entry_target *t, void **dstptr,\n"
           "\t\t\t\tunsigned int *size)\n"
           "{\n"
           "\tconst struct xt_target *target = t->u.kernel.target;\n"
           "\tstruct compat_xt_entry_target *ct = (struct compat_xt_entry_target *)t;\n"
           "\tint pad, off = xt_compat_target_offset(target);\n"
           "\tu_int16_t tsize = ct->u.user.target_size;\n"
           "\tchar name[sizeof(t->u.user.name)];\n"
           "\n"
           "\tt = *dstptr;\n"
           "\tmemcpy(t, ct, sizeof(*ct));\n"
           "\tif (target->compat_from_user)\n"
           "\t\ttarget->compat_from_user(t->data, ct->data);\n"
           "\telse\n"
           "\t\tmemcpy(t->data, ct->data, tsize - sizeof(*t));\n"
           "\tpad = XT_ALIGN(target->targetsize) - target->targetsize;\n"
           "\tif (pad > 0)\n"
           "\t\tmemset(t->data + target->targetsize, 0, pad);\n"
           "\n"
           "\ttsize += off;\n"
           "\tt->u.user.target_size = tsize;\n"
           "\tstrlcpy(name, target->name, sizeof(name));\n"
           "\tmodule_put(target->me);\n"
           "\tstrncpy(t->u.user.name, name, sizeof(t->u.user.name));\n"
           "\n"
           "\t*size += off;\n"
           "\t*dstptr += tsize;\n"
           "}\n"
           "#endif\n";
}

// The same file after the fix landed: the three padding lines are gone.
inline std::string xtables_source_patched() {
    std::string src = xtables_source_vulnerable();
    const std::string block =
        "\tpad = XT_ALIGN(target->targetsize) - target->targetsize;\n"
        "\tif (pad > 0)\n"
        "\t\tmemset(t->data + target->targetsize, 0, pad);\n";
    auto pos = src.find(block);
    return src.substr(0, pos) + src.substr(pos + block.size());
}

// One-hunk deletion patch with three lines of context on each side.
inline std::string xtables_patch_text() {
    return "commit aaaabbbbccccddddeeeeffff0000111122223333\n"
           "\n"
           "    netfilter: x_tables: drop the bogus compat padding\n"
           "\n"
           "diff --git a/net/netfilter/x_tables.c b/net/netfilter/x_tables.c\n"
           "index 6afd7b5..1f8c0cd 100644\n"
           "--- a/net/netfilter/x_tables.c\n"
           "+++ b/net/netfilter/x_tables.c\n"
           "@@ -25,9 +25,6 @@ void xt_compat_target_from_user(struct xt_entry_target *t, void "
           "**dstptr,\n"
           " \t\ttarget->compat_from_user(t->data, ct->data);\n"
           " \telse\n"
           " \t\tmemcpy(t->data, ct->data, tsize - sizeof(*t));\n"
           "-\tpad = XT_ALIGN(target->targetsize) - target->targetsize;\n"
           "-\tif (pad > 0)\n"
           "-\t\tmemset(t->data + target->targetsize, 0, pad);\n"
           " \n"
           " \ttsize += off;\n"
           " \tt->u.user.target_size = tsize;\n";
}

inline MemoryTree netfilter_mini_tree() {
    MemoryTree tree;
    tree.put("Kconfig",
             "mainmenu \"Mini Kernel Configuration\"\n"
             "\n"
             "config COMPAT\n"
             "\tbool \"32-bit syscall compatibility\"\n"
             "\n"
             "source \"net/Kconfig\"\n");
    tree.put("net/Kconfig",
             "menuconfig NET\n"
             "\tbool \"Networking support\"\n"
             "\n"
             "if NET\n"
             "\n"
             "config INET\n"
             "\tbool \"TCP/IP networking\"\n"
             "\n"
             "source \"net/netfilter/Kconfig\"\n"
             "\n"
             "endif\n");
    tree.put("net/netfilter/Kconfig",
             "menuconfig NETFILTER\n"
             "\tbool \"Network packet filtering framework (Netfilter)\"\n"
             "\n"
             "menu \"Core Netfilter Configuration\"\n"
             "\tdepends on NET && INET && NETFILTER\n"
             "\n"
             "config NETFILTER_XTABLES\n"
             "\ttristate \"Netfilter Xtables support (required for ip_tables)\"\n"
             "\tdepends on NETFILTER\n"
             "\n"
             "config NETFILTER_XT_TARGET_NFQUEUE\n"
             "\ttristate \"NFQUEUE target support\"\n"
             "\tdepends on NETFILTER_XTABLES\n"
             "\n"
             "endmenu\n");
    tree.put("Makefile", "obj-y += net/\n");
    tree.put("net/Makefile", "obj-$(CONFIG_NETFILTER) += netfilter/\n");
    tree.put("net/netfilter/Makefile",
             "obj-$(CONFIG_NETFILTER) += netfilter.o\n"
             "obj-$(CONFIG_NETFILTER_XTABLES) += x_tables.o\n");
    tree.put("net/netfilter/x_tables.c", xtables_source_vulnerable());
    return tree;
}

inline VulnProfile netfilter_profile() {
    VulnProfile p;
    p.cve_id = "CVE-2021-22555";
    p.description = "A heap out-of-bounds write in net/netfilter/x_tables.c allows local "
                    "privilege escalation via user namespaces.";
    VersionRange r;
    r.upper = KernelVersion::parse("5.12");
    r.upper_inclusive = false;
    p.claimed_ranges = {r};
    p.cvss = 7.8;
    p.patch_commits = {"aaaabbbbccccddddeeeeffff0000111122223333"};
    return p;
}

} // namespace kvet::testing
