#include "kvet/config_identify.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

using namespace kvet;

TEST_CASE("the netfilter mini tree reproduces the expected config sets exactly") {
    auto tree = kvet::testing::netfilter_mini_tree();
    auto graph = build_graph(tree, "Kconfig");
    auto profile = kvet::testing::netfilter_profile();
    auto patch = parse_patch(kvet::testing::xtables_patch_text());

    auto report = get_vul_configs(profile, patch, tree, graph, "5.11.14");

    CHECK(report.ddc.empty());
    CHECK(report.dpc == std::set<std::string>{"NETFILTER", "NETFILTER_XTABLES"});
    CHECK(report.dcc == std::set<std::string>{"COMPAT"});
    CHECK(report.hrc == std::set<std::string>{"NET", "INET"});
    CHECK(report.hsc.empty());
    CHECK(report.hdc == std::set<std::string>{"NETFILTER_XT_TARGET_NFQUEUE"});
    CHECK(report.union_s == std::set<std::string>{"NET", "INET", "NETFILTER",
                                                  "NETFILTER_XTABLES", "COMPAT",
                                                  "NETFILTER_XT_TARGET_NFQUEUE"});
    CHECK(report.graph_stats.first == graph.vertex_count());
    CHECK(report.graph_stats.second == graph.edge_count());
    CHECK_FALSE(report.empty_direct_set);
}

TEST_CASE("hidden sets are disjoint from hrc and the direct seeds") {
    auto tree = kvet::testing::netfilter_mini_tree();
    auto graph = build_graph(tree, "Kconfig");
    auto report = get_vul_configs(kvet::testing::netfilter_profile(),
                                  parse_patch(kvet::testing::xtables_patch_text()), tree, graph);

    auto direct = report.direct();
    for (const auto& sym : report.hrc)
        CHECK(direct.count(sym) == 0);
    for (const auto& sym : report.hsc) {
        CHECK(report.hrc.count(sym) == 0);
        CHECK(direct.count(sym) == 0);
    }
    for (const auto& sym : report.hdc) {
        CHECK(report.hrc.count(sym) == 0);
        CHECK(direct.count(sym) == 0);
    }
    // no menu title ever leaks into a symbol set
    for (const auto& sym : report.union_s)
        CHECK(sym.find(' ') == std::string::npos);
}

TEST_CASE("empty patch and config-free description yield an empty diagnostic report") {
    auto tree = kvet::testing::netfilter_mini_tree();
    auto graph = build_graph(tree, "Kconfig");
    VulnProfile profile;
    profile.cve_id = "CVE-2020-9999";
    profile.description = "A logic bug with no config dependencies.";

    auto report = get_vul_configs(profile, Patch{}, tree, graph);
    CHECK(report.empty_direct_set);
    CHECK(report.union_s.empty());
    CHECK(report.hrc.empty());
    CHECK_FALSE(report.warnings.empty());
}

TEST_CASE("report serialization is deterministic and ordered") {
    auto tree = kvet::testing::netfilter_mini_tree();
    auto graph = build_graph(tree, "Kconfig");
    auto profile = kvet::testing::netfilter_profile();
    auto patch = parse_patch(kvet::testing::xtables_patch_text());

    auto a = report_to_json(get_vul_configs(profile, patch, tree, graph, "5.11.14"));
    auto b = report_to_json(get_vul_configs(profile, patch, tree, graph, "5.11.14"));
    CHECK(a == b);
    // categories appear in the fixed presentation order
    CHECK(a.find("\"ddc\"") < a.find("\"dpc\""));
    CHECK(a.find("\"dpc\"") < a.find("\"dcc\""));
    CHECK(a.find("\"dcc\"") < a.find("\"hrc\""));
    CHECK(a.find("\"hrc\"") < a.find("\"hsc\""));
    CHECK(a.find("\"hsc\"") < a.find("\"hdc\""));
}

TEST_CASE("description-named files contribute path configs") {
    auto tree = kvet::testing::netfilter_mini_tree();
    auto graph = build_graph(tree, "Kconfig");
    VulnProfile profile;
    profile.cve_id = "CVE-2020-8888";
    profile.description = "Flaw in net/netfilter/x_tables.c packet parsing.";

    auto report = get_vul_configs(profile, Patch{}, tree, graph);
    CHECK(report.dpc == std::set<std::string>{"NETFILTER", "NETFILTER_XTABLES"});
    CHECK(report.affected_files == std::vector<std::string>{"net/netfilter/x_tables.c"});
}

TEST_CASE("minimal hints flag known-essential symbols") {
    ConfigReport report;
    report.cve_id = "CVE-2023-32233";
    report.union_s = {"NF_TABLES", "NF_TABLES_INET", "NFT_LOG", "NFT_QUOTA", "NETFILTER",
                      "UNRELATED"};

    auto annotated = minimal_hint(report, builtin_hint_table());
    CHECK(annotated.essential_hints ==
          std::vector<std::string>{"NFT_LOG", "NFT_QUOTA", "NF_TABLES", "NF_TABLES_INET"});
    CHECK(annotated.union_s == report.union_s); // annotation only
}

TEST_CASE("CVE-2022-34918 hints") {
    ConfigReport report;
    report.cve_id = "CVE-2022-34918";
    report.union_s = {"NF_TABLES", "NF_TABLES_INET", "NET"};
    auto annotated = minimal_hint(report, builtin_hint_table());
    CHECK(annotated.essential_hints == std::vector<std::string>{"NF_TABLES", "NF_TABLES_INET"});
}

TEST_CASE("a CVE absent from the hint table gets zero flags") {
    ConfigReport report;
    report.cve_id = "CVE-2016-0001";
    report.union_s = {"NF_TABLES"};
    CHECK(minimal_hint(report, builtin_hint_table()).essential_hints.empty());
}

TEST_CASE("hint tables parse from text") {
    auto table = parse_hint_table("# curated\n"
                                  "CVE-2021-22555 NETFILTER_XT_TARGET_NFQUEUE\n"
                                  "CVE-2022-1015 NF_TABLES NF_TABLES_IPV4\n");
    REQUIRE(table.size() == 2);
    CHECK(table["CVE-2022-1015"] == std::set<std::string>{"NF_TABLES", "NF_TABLES_IPV4"});
}
