#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace warntriage;

namespace {

const char* kFlawfinderHeader =
    "File,Line,Column,DefaultLevel,Level,Category,Name,Warning,Suggestion,Note,CWEs,Context,Fingerprint,"
    "ToolVersion,RuleId,HelpUri\n";

std::string ff_row(const std::string& file, int line, int level, const std::string& category,
                   const std::string& name, const std::string& context) {
    return file + "," + std::to_string(line) + ",3,4," + std::to_string(level) + "," + category + "," + name +
           ",\"Does not check for buffer overflows when copying to destination [MS-banned] (CWE-120)\","
           "\"Consider using snprintf, strcpy_s, or strlcpy (warning: strncpy easily misused)\",,CWE-120,\"" +
           context + "\",abc123,2.0.19,FF1001,https://cwe.mitre.org/data/definitions/120.html\n";
}

std::string random_bytes(Rng& rng, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<char>(rng.below(256));
    return s;
}

template <typename F>
void expect_total(F&& parse, const std::string& payload) {
    try {
        parse(payload);
    } catch (const MalformedReport&) {
    } catch (const std::exception& e) {
        ADD_FAILURE() << "unexpected exception type: " << e.what();
    }
}

} // namespace

TEST(Infer, EmptyArray) { EXPECT_TRUE(parse_infer_report("[]").empty()); }

TEST(Infer, NullDereferenceEntry) {
    auto recs = parse_infer_report(R"([{"bug_type":"NULL_DEREFERENCE","qualifier":"pointer `p` last assigned on line 10 could be null and is dereferenced at line 12.","severity":"ERROR","line":12,"column":5,"procedure":"main","file":"a.c","key":"a.c|main|NULL_DEREFERENCE","hash":"1e3f"}])");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].wtype, WarningType::NullDereference);
    EXPECT_EQ(recs[0].tool, Tool::Infer);
    EXPECT_EQ(recs[0].file, "a.c");
    EXPECT_EQ(recs[0].line, 12);
    EXPECT_EQ(recs[0].column, 5);
    EXPECT_EQ(recs[0].procedure, "main");
}

TEST(Infer, OutOfScopeTypeDropped) {
    EXPECT_TRUE(parse_infer_report(
                    R"([{"bug_type":"PULSE_UNNECESSARY_COPY","qualifier":"q","line":1,"procedure":"f","file":"a.c"}])")
                    .empty());
}

TEST(Infer, TypeMapping) {
    EXPECT_EQ(map_infer_bug_type("UNINITIALIZED_VALUE"), WarningType::UninitializedVariable);
    EXPECT_EQ(map_infer_bug_type("UNINITIALIZED_VARIABLE"), WarningType::UninitializedVariable);
    EXPECT_EQ(map_infer_bug_type("RESOURCE_LEAK"), WarningType::ResourceLeak);
    EXPECT_EQ(map_infer_bug_type("MEMORY_LEAK"), WarningType::ResourceLeak);
    EXPECT_EQ(map_infer_bug_type("DEAD_STORE"), WarningType::DeadStore);
    EXPECT_FALSE(map_infer_bug_type("NULLPTR_DEREFERENCE_LATENT"));
}

TEST(Infer, ContextCodeFromSourceLookup) {
    SourceLookup lookup = [](const std::string& file, int line) -> std::optional<std::string> {
        if (file == "a.c" && line == 3) return std::string("   x = *p;   ");
        return std::nullopt;
    };
    auto recs = parse_infer_report(
        R"([{"bug_type":"NULL_DEREFERENCE","qualifier":"q","line":3,"procedure":"f","file":"a.c"}])", lookup);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].context_code, "x = *p;");
}

TEST(Infer, MalformedInputs) {
    EXPECT_THROW(parse_infer_report("not json"), MalformedReport);
    EXPECT_THROW(parse_infer_report("{}"), MalformedReport);
    EXPECT_THROW(parse_infer_report(R"([{"bug_type":"DEAD_STORE","qualifier":"q","procedure":"f","file":"a.c"}])"),
                 MalformedReport);
    EXPECT_THROW(parse_infer_report(R"([{"bug_type":"DEAD_STORE","qualifier":"q","line":0,"procedure":"f","file":"a.c"}])"),
                 MalformedReport);
    // required fields only matter on retained entries
    EXPECT_NO_THROW(parse_infer_report(R"([{"bug_type":"CHECKERS_PRINTF_ARGS"}])"));
}

TEST(Flawfinder, HeaderOnly) { EXPECT_TRUE(parse_flawfinder_report(kFlawfinderHeader).empty()); }

TEST(Flawfinder, BufferRowAtLevelFour) {
    auto csv = std::string(kFlawfinderHeader) + ff_row("src/x.c", 42, 4, "buffer", "strcpy", "strcpy(dst, src);");
    auto recs = parse_flawfinder_report(csv);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].wtype, WarningType::BufferOverflow);
    EXPECT_EQ(recs[0].tool, Tool::Flawfinder);
    EXPECT_EQ(recs[0].line, 42);
    EXPECT_EQ(recs[0].procedure, "");
    EXPECT_EQ(recs[0].context_code, "strcpy(dst, src);");
    EXPECT_EQ(parse_qualifier(WarningType::BufferOverflow, recs[0].qualifier).function, "strcpy");
}

TEST(Flawfinder, LowLevelAndOtherCategoriesFiltered) {
    auto csv = std::string(kFlawfinderHeader) + ff_row("a.c", 1, 2, "buffer", "strcpy", "strcpy(a, b);") +
               ff_row("a.c", 2, 5, "race", "access", "access(p, 0);");
    EXPECT_TRUE(parse_flawfinder_report(csv).empty());
}

TEST(Flawfinder, MalformedInputs) {
    EXPECT_THROW(parse_flawfinder_report(""), MalformedReport);
    EXPECT_THROW(parse_flawfinder_report("File,Line\n"), MalformedReport);
    EXPECT_THROW(parse_flawfinder_report(std::string(kFlawfinderHeader) + "a.c,1\n"), MalformedReport);
}

TEST(Flawfinder, QuotedFieldsWithCommasAndNewlines) {
    auto csv = std::string(kFlawfinderHeader) + ff_row("a.c", 7, 4, "buffer", "sprintf", "sprintf(b, \"\"%s,%d\"\", s, n);");
    auto recs = parse_flawfinder_report(csv);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].context_code, "sprintf(b, \"%s,%d\", s, n);");
}

TEST(Flawfinder, RaisingThresholdNeverAddsRecords) {
    Rng rng(21);
    for (int iter = 0; iter < 100; ++iter) {
        std::string csv = kFlawfinderHeader;
        auto n = rng.below(15);
        for (std::uint64_t i = 0; i < n; ++i)
            csv += ff_row("f.c", 1 + static_cast<int>(i), static_cast<int>(rng.below(6)),
                          rng.below(3) ? "buffer" : "format", "strcat", "strcat(a" + std::to_string(i) + ", b);");
        std::size_t prev = SIZE_MAX;
        for (int level = 0; level <= 6; ++level) {
            auto size = parse_flawfinder_report(csv, level).size();
            EXPECT_LE(size, prev);
            prev = size;
        }
    }
}

TEST(Adapters, TotalityOnRandomBytes) {
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        auto bytes = random_bytes(rng, rng.below(200));
        expect_total([](const std::string& p) { return parse_infer_report(p); }, bytes);
        expect_total([](const std::string& p) { return parse_flawfinder_report(p); }, bytes);
    }
}

TEST(Adapters, TotalityOnMutatedReports) {
    Rng rng(100);
    std::string infer =
        R"([{"bug_type":"RESOURCE_LEAK","qualifier":"resource acquired to `f` by call to `fopen()` at line 2 is not released after line 9","line":9,"column":1,"procedure":"g","file":"b.c"}])";
    std::string ff = std::string(kFlawfinderHeader) + ff_row("a.c", 3, 4, "buffer", "gets", "gets(b);");
    for (int i = 0; i < 1000; ++i) {
        for (auto* base : {&infer, &ff}) {
            auto s = *base;
            auto edits = 1 + rng.below(4);
            for (std::uint64_t e = 0; e < edits && !s.empty(); ++e) {
                auto pos = rng.below(s.size());
                switch (rng.below(3)) {
                case 0: s[pos] = static_cast<char>(rng.below(256)); break;
                case 1: s.erase(pos, 1); break;
                default: s.insert(pos, 1, ",\"[]{}:0"[rng.below(8)]); break;
                }
            }
            expect_total([](const std::string& p) { return parse_infer_report(p); }, s);
            expect_total([](const std::string& p) { return parse_flawfinder_report(p); }, s);
        }
    }
}

TEST(Registry, DefaultsAndExtension) {
    auto reg = AdapterRegistry::with_defaults();
    EXPECT_TRUE(reg.has("infer"));
    EXPECT_TRUE(reg.has("flawfinder"));
    EXPECT_TRUE(reg.parse(RawReport{Tool::Infer, "[]"}).empty());
    EXPECT_THROW(reg.parse("sonarqube", "{}"), MalformedReport);

    reg.register_adapter("sonarqube", [](std::string_view) {
        return std::vector<WarningRecord>{wt_test::warn("s")};
    });
    EXPECT_EQ(reg.parse("sonarqube", "").size(), 1u);
    EXPECT_EQ(reg.names(), (std::vector<std::string>{"flawfinder", "infer", "sonarqube"}));
}
