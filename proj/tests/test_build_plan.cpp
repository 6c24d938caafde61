#include "kvet/build_plan.hpp"

#include "support/fixtures.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace kvet;
using kvet::testing::Rng;

TEST_CASE("fragment parsing reads both line forms") {
    auto frag = ConfigFragment::parse("# generated baseline\n"
                                      "CONFIG_NET=y\n"
                                      "# CONFIG_COMPAT is not set\n"
                                      "CONFIG_LOG_BUF_SHIFT=17\n"
                                      "CONFIG_DEFAULT_HOSTNAME=\"(none)\"\n"
                                      "CONFIG_MODULES=m\n");
    REQUIRE(frag.entries.size() == 5);
    CHECK(frag.entries[0].symbol == "NET");
    CHECK(frag.entries[0].value == "y");
    CHECK(frag.entries[1].symbol == "COMPAT");
    CHECK(frag.entries[1].value == "n");
    CHECK(frag.entries[1].not_set_form);
    CHECK(frag.entries[2].value == "17");
    CHECK(frag.entries[3].value == "\"(none)\"");
}

TEST_CASE("a not-set base symbol is forced to y by the report") {
    auto base = ConfigFragment::parse("# CONFIG_COMPAT is not set\nCONFIG_NET=y\n");
    ConfigReport report;
    report.union_s = {"COMPAT"};

    auto merged = merge_fragment(base, report);
    CHECK(merged.conflicts.empty());
    auto* compat = merged.fragment.find("COMPAT");
    REQUIRE(compat);
    CHECK(compat->value == "y");
    CHECK_FALSE(compat->not_set_form);
    CHECK(merged.fragment.render() == "CONFIG_COMPAT=y\nCONFIG_NET=y\n");
}

TEST_CASE("an empty report leaves the base untouched") {
    auto base = ConfigFragment::parse("CONFIG_A=y\n# CONFIG_B is not set\nCONFIG_C=\"str\"\n");
    ConfigReport report;
    auto merged = merge_fragment(base, report);
    CHECK(merged.fragment == base);
    CHECK(merged.fragment.render() == base.render());
}

TEST_CASE("typed base values are conflicts; the report still wins") {
    auto base = ConfigFragment::parse("CONFIG_LOG_BUF_SHIFT=17\n");
    ConfigReport report;
    report.union_s = {"LOG_BUF_SHIFT"};
    auto merged = merge_fragment(base, report);
    REQUIRE(merged.conflicts.size() == 1);
    CHECK(merged.fragment.find("LOG_BUF_SHIFT")->value == "y");
}

TEST_CASE("new symbols are appended sorted after the base lines") {
    auto base = ConfigFragment::parse("CONFIG_ZEBRA=y\nCONFIG_ALPHA=y\n");
    ConfigReport report;
    report.union_s = {"NETFILTER", "COMPAT", "INET"};
    auto merged = merge_fragment(base, report);
    CHECK(merged.fragment.render() == "CONFIG_ZEBRA=y\nCONFIG_ALPHA=y\nCONFIG_COMPAT=y\n"
                                      "CONFIG_INET=y\nCONFIG_NETFILTER=y\n");
}

TEST_CASE("merge is idempotent and render round-trips on fuzzed inputs") {
    Rng rng(67);
    for (int round = 0; round < 550; ++round) {
        ConfigFragment base;
        int n = rng.range(0, 12);
        for (int i = 0; i < n; ++i) {
            ConfigFragment::Entry e;
            e.symbol = "SYM_" + std::to_string(rng.range(0, 20));
            if (base.find(e.symbol))
                continue;
            switch (rng.range(0, 3)) {
            case 0: e.value = "y"; break;
            case 1: e.value = "m"; break;
            case 2:
                e.value = "n";
                e.not_set_form = rng.chance(0.7);
                break;
            default: e.value = std::to_string(rng.range(0, 4096)); break;
            }
            base.entries.push_back(e);
        }
        ConfigReport report;
        int m = rng.range(0, 8);
        for (int i = 0; i < m; ++i)
            report.union_s.insert("SYM_" + std::to_string(rng.range(0, 25)));

        auto once = merge_fragment(base, report);
        auto twice = merge_fragment(once.fragment, report);
        CHECK(once.fragment == twice.fragment);
        CHECK(once.fragment.render() == twice.fragment.render());

        // round-trip: parse(render(f)) == f
        auto reparsed = ConfigFragment::parse(once.fragment.render());
        CHECK(reparsed == once.fragment);

        // oracle: the merged symbol map equals a naive dictionary merge
        std::map<std::string, std::string> expected;
        for (const auto& e : base.entries)
            expected[e.symbol] = e.value;
        for (const auto& s : report.union_s)
            expected[s] = "y";
        std::map<std::string, std::string> got;
        for (const auto& e : once.fragment.entries)
            got[e.symbol] = e.value;
        CHECK(got == expected);
    }
}

TEST_CASE("the plan manifest names the identified vulnerable version") {
    auto profile = kvet::testing::netfilter_profile();
    VersionScanReport scan_report;
    scan_report.cve_id = profile.cve_id;
    scan_report.vulnerable_version = KernelVersion::parse("5.11.14");

    ConfigFragment frag;
    frag.entries.push_back({"COMPAT", "y", false, "report"});

    auto manifest = emit_plan(frag, profile, scan_report, "CVE-2021-22555.config");
    auto j = nlohmann::json::parse(manifest);
    CHECK(j["actionable"] == true);
    CHECK(j["kernel_version"] == "5.11.14");
    bool mentions_tarball = false;
    for (const auto& step : j["steps"])
        if (step["cmd"].get<std::string>().find("linux-5.11.14.tar.xz") != std::string::npos)
            mentions_tarball = true;
    CHECK(mentions_tarball);

    auto script = plan_shell_script(manifest);
    CHECK(script.find("#!/bin/sh") == 0);
    CHECK(script.find("make -C linux-5.11.14 defconfig") != std::string::npos);
}

TEST_CASE("a scan without a vulnerable version yields a non-actionable manifest") {
    auto profile = kvet::testing::netfilter_profile();
    VersionScanReport scan_report;
    scan_report.cve_id = profile.cve_id;
    scan_report.all_patched_in_range = true;

    auto manifest = emit_plan(ConfigFragment{}, profile, scan_report, "frag.config");
    auto j = nlohmann::json::parse(manifest);
    CHECK(j["actionable"] == false);
    CHECK(j["steps"].empty());
    auto script = plan_shell_script(manifest);
    CHECK(script.find("exit 1") != std::string::npos);
}

TEST_CASE("golden manifest for the netfilter fixture") {
    auto profile = kvet::testing::netfilter_profile();
    VersionScanReport scan_report;
    scan_report.cve_id = profile.cve_id;
    scan_report.vulnerable_version = KernelVersion::parse("5.11.14");
    ConfigFragment frag;
    frag.entries.push_back({"COMPAT", "y", false, "report"});
    frag.entries.push_back({"NET", "y", false, "report"});

    auto manifest = emit_plan(frag, profile, scan_report, "CVE-2021-22555.config");
    const std::string expected = R"gold({
  "schema": 1,
  "cve_id": "CVE-2021-22555",
  "actionable": true,
  "kernel_version": "5.11.14",
  "fragment_path": "CVE-2021-22555.config",
  "fragment": [
    {
      "symbol": "COMPAT",
      "value": "y",
      "source": "report"
    },
    {
      "symbol": "NET",
      "value": "y",
      "source": "report"
    }
  ],
  "steps": [
    {
      "name": "fetch",
      "cmd": "curl -LO https://cdn.kernel.org/pub/linux/kernel/v5.x/linux-5.11.14.tar.xz"
    },
    {
      "name": "extract",
      "cmd": "tar -xf linux-5.11.14.tar.xz"
    },
    {
      "name": "defconfig",
      "cmd": "make -C linux-5.11.14 defconfig"
    },
    {
      "name": "merge-fragment",
      "cmd": "(cd linux-5.11.14 && scripts/kconfig/merge_config.sh -m .config CVE-2021-22555.config)"
    },
    {
      "name": "olddefconfig",
      "cmd": "make -C linux-5.11.14 olddefconfig"
    },
    {
      "name": "build",
      "cmd": "make -C linux-5.11.14 -j\"$(nproc)\""
    }
  ]
}
)gold";
    CHECK(manifest == expected);
}
