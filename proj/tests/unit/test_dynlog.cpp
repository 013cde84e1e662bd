#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "datamap/dynlog.hpp"
#include "datamap/error.hpp"

using namespace datamap;
using namespace datamap::dynlog;

namespace {

EpochRecord rec(int epoch, std::string id, int gold, std::vector<double> probs) {
    return EpochRecord{epoch, std::move(id), gold, std::move(probs)};
}

// 2 instances x 2 epochs, the smallest complete grid
std::vector<EpochRecord> tiny_grid() {
    return {
        rec(0, "a", 0, {0.9, 0.1}),
        rec(1, "a", 0, {0.8, 0.2}),
        rec(0, "b", 1, {0.3, 0.7}),
        rec(1, "b", 1, {0.4, 0.6}),
    };
}

}  // namespace

TEST_CASE("from_records builds the smallest complete grid") {
    const auto log = TrainingRunLog::from_records(tiny_grid());
    CHECK(log.num_epochs() == 2);
    CHECK(log.num_classes() == 2);
    CHECK(log.num_instances() == 2);
    CHECK(log.instance_ids() == std::vector<std::string>{"a", "b"});
    CHECK(log.record(0, 1).probs == std::vector<double>{0.8, 0.2});
    CHECK(log.gold_prob_sequence(1) == std::vector<double>{0.7, 0.6});
}

TEST_CASE("from_records regroups shuffled records identically") {
    auto records = tiny_grid();
    std::swap(records[0], records[3]);
    std::swap(records[1], records[2]);
    CHECK(TrainingRunLog::from_records(records) == TrainingRunLog::from_records(tiny_grid()));
}

TEST_CASE("from_records rejects structural defects") {
    SUBCASE("duplicate cell") {
        auto records = tiny_grid();
        records.push_back(rec(0, "a", 0, {0.5, 0.5}));
        CHECK_THROWS_AS(TrainingRunLog::from_records(records), ValidationError);
    }
    SUBCASE("missing cell names the hole") {
        auto records = tiny_grid();
        records.pop_back();  // drop ("b", 1)
        CHECK_THROWS_WITH_AS(TrainingRunLog::from_records(records),
                             doctest::Contains("b"), ValidationError);
    }
    SUBCASE("inconsistent class count") {
        auto records = tiny_grid();
        records[2].probs = {0.2, 0.3, 0.5};
        CHECK_THROWS_AS(TrainingRunLog::from_records(records), ValidationError);
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(TrainingRunLog::from_records({}), ValidationError);
    }
}

TEST_CASE("validate returns violations as data") {
    SUBCASE("clean log is clean") {
        CHECK(validate(TrainingRunLog::from_records(tiny_grid())).empty());
    }
    SUBCASE("negative probability entry") {
        auto records = tiny_grid();
        records[1].probs = {1.1, -0.1};
        const auto report = validate(TrainingRunLog::from_records(records));
        REQUIRE(report.size() >= 1);
        CHECK(report[0].instance_id == "a");
        CHECK(report[0].epoch == 1);
        CHECK(report[0].field == "probs");
    }
    SUBCASE("probability sum outside tolerance") {
        auto records = tiny_grid();
        records[0].probs = {0.6, 0.6};
        const auto report = validate(TrainingRunLog::from_records(records));
        REQUIRE(!report.empty());
        bool found = false;
        for (const auto& v : report)
            if (v.message.find("sum") != std::string::npos) found = true;
        CHECK(found);
    }
    SUBCASE("sum within 1e-6 tolerance passes") {
        auto records = tiny_grid();
        records[0].probs = {0.9, 0.1 + 5e-7};
        CHECK(validate(TrainingRunLog::from_records(records)).empty());
    }
    SUBCASE("gold out of range") {
        auto records = tiny_grid();
        records[3].gold = 3;
        const auto report = validate(TrainingRunLog::from_records(records));
        REQUIRE(!report.empty());
        bool found = false;
        for (const auto& v : report)
            if (v.message.find("gold") != std::string::npos ||
                v.field == "gold") found = true;
        CHECK(found);
    }
}

TEST_CASE("parse_log reads full-form lines in any order") {
    const std::string text =
        "{\"epoch\":1,\"id\":\"b\",\"gold\":1,\"probs\":[0.4,0.6]}\n"
        "{\"epoch\":0,\"id\":\"a\",\"gold\":0,\"probs\":[0.9,0.1]}\n"
        "{\"epoch\":0,\"id\":\"b\",\"gold\":1,\"probs\":[0.3,0.7]}\n"
        "{\"epoch\":1,\"id\":\"a\",\"gold\":0,\"probs\":[0.8,0.2]}\n";
    std::istringstream in(text);
    CHECK(parse_log(in) == TrainingRunLog::from_records(tiny_grid()));
}

TEST_CASE("parse_log reports the line number of a malformed line") {
    std::istringstream in(
        "{\"epoch\":0,\"id\":\"a\",\"gold\":0,\"probs\":[1.0,0.0]}\n"
        "this is not a record\n");
    CHECK_THROWS_WITH_AS(parse_log(in), doctest::Contains("line 2"), ParseError);
}

TEST_CASE("parse_log rejects a probability sum outside tolerance") {
    std::istringstream in("{\"epoch\":0,\"id\":\"a\",\"gold\":0,\"probs\":[0.6,0.6]}\n");
    CHECK_THROWS_AS(parse_log(in), ValidationError);
}

TEST_CASE("compact form expands to a binary distribution") {
    const std::string text =
        "{\"num_classes\":2}\n"
        "{\"epoch\":0,\"id\":\"a\",\"gold\":1,\"p_gold\":0.7,\"pred\":1}\n"
        "{\"epoch\":0,\"id\":\"b\",\"gold\":0,\"p_gold\":0.2,\"pred\":1}\n";
    std::istringstream in(text);
    const auto log = parse_log(in);
    CHECK(log.record(0, 0).probs == std::vector<double>{1.0 - 0.7, 0.7});
    CHECK(log.record(1, 0).probs == std::vector<double>{0.2, 1.0 - 0.2});
}

TEST_CASE("compact records demand the header and a consistent pred") {
    SUBCASE("no header") {
        std::istringstream in("{\"epoch\":0,\"id\":\"a\",\"gold\":1,\"p_gold\":0.7,\"pred\":1}\n");
        CHECK_THROWS_AS(parse_log(in), ParseError);
    }
    SUBCASE("pred contradicts p_gold") {
        std::istringstream in(
            "{\"num_classes\":2}\n"
            "{\"epoch\":0,\"id\":\"a\",\"gold\":1,\"p_gold\":0.7,\"pred\":0}\n");
        CHECK_THROWS_AS(parse_log(in), ParseError);
    }
    SUBCASE("p_gold exactly 0.5 accepts either pred") {
        std::istringstream in(
            "{\"num_classes\":2}\n"
            "{\"epoch\":0,\"id\":\"a\",\"gold\":1,\"p_gold\":0.5,\"pred\":0}\n");
        CHECK_NOTHROW(parse_log(in));
    }
}

TEST_CASE("serialize then parse is the identity") {
    const auto log = TrainingRunLog::from_records(tiny_grid());
    std::istringstream in(serialize_log(log));
    CHECK(parse_log(in) == log);
}

TEST_CASE("serialization is canonical across input orders") {
    auto shuffled = tiny_grid();
    std::swap(shuffled[0], shuffled[2]);
    CHECK(serialize_log(TrainingRunLog::from_records(shuffled)) ==
          serialize_log(TrainingRunLog::from_records(tiny_grid())));
}

TEST_CASE("parse_log_collect reports value violations without aborting") {
    std::istringstream in(
        "{\"epoch\":0,\"id\":\"a\",\"gold\":0,\"probs\":[0.6,0.6]}\n"
        "{\"epoch\":0,\"id\":\"b\",\"gold\":1,\"probs\":[0.3,0.7]}\n");
    std::vector<Violation> violations;
    const auto log = parse_log_collect(in, violations);
    CHECK(log.num_instances() == 2);
    REQUIRE(!violations.empty());
    CHECK(violations[0].instance_id == "a");
}

TEST_CASE("restrict_epochs keeps a prefix window") {
    std::vector<EpochRecord> records;
    for (int e = 0; e < 6; ++e) {
        records.push_back(rec(e, "a", 0, {0.5 + 0.05 * e, 0.5 - 0.05 * e}));
        records.push_back(rec(e, "b", 1, {0.4, 0.6}));
    }
    const auto log = TrainingRunLog::from_records(records);

    const auto first3 = restrict_epochs(log, 3);
    CHECK(first3.num_epochs() == 3);
    CHECK(first3.instance_ids() == log.instance_ids());
    CHECK(first3.record(0, 2) == log.record(0, 2));

    SUBCASE("e_max = E is the identity") {
        CHECK(restrict_epochs(log, 6) == log);
    }
    SUBCASE("windows compose") {
        CHECK(restrict_epochs(restrict_epochs(log, 4), 2) == restrict_epochs(log, 2));
    }
    SUBCASE("bounds are enforced") {
        CHECK_THROWS_AS(restrict_epochs(log, 0), ValidationError);
        CHECK_THROWS_AS(restrict_epochs(log, 7), ValidationError);
    }
}
