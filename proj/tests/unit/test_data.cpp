#include <catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include "famcure/data.hpp"
#include "famcure/io.hpp"

using namespace famcure;

TEST_CASE("event counting") {
    Family all_censored("f", {SubjectRecord(4.0, 0), SubjectRecord(5.0, 0), SubjectRecord(6.0, 0)});
    REQUIRE(event_count(all_censored) == 0);
    Family mixed("g", {SubjectRecord(4.0, 1), SubjectRecord(5.0, 0), SubjectRecord(6.0, 1)});
    REQUIRE(event_count(mixed) == 2);
    REQUIRE(event_count(mixed) <= static_cast<int>(mixed.members.size()));
    REQUIRE_THROWS_AS(Family("empty", {}), std::invalid_argument);
}

TEST_CASE("record validation") {
    REQUIRE_THROWS_AS(SubjectRecord(-1.0, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(SubjectRecord(std::numeric_limits<double>::infinity(), 0), std::invalid_argument);
    REQUIRE_THROWS_AS(SubjectRecord(1.0, 2), std::invalid_argument);
    std::vector<SubjectRecord> two_mains{SubjectRecord(1.0, 0, Role::main),
                                         SubjectRecord(2.0, 0, Role::main)};
    REQUIRE_THROWS_AS(Family("m", two_mains), std::invalid_argument);
}

TEST_CASE("family history indicator") {
    SubjectRecord main(45.0, 0, Role::main);
    main.birth_year = 1950.0;
    SubjectRecord mother(52.0, 1, Role::mother);
    mother.birth_year = 1922.0;
    mother.event_year = 1974.0;
    SubjectRecord sister(40.0, 0, Role::sister);
    sister.birth_year = 1952.0;

    Family f("h", {main, mother, sister});
    const FhLabel label = fh_indicator(f, 0);
    REQUIRE(label.fh_end == 1);
    REQUIRE(label.fh_change_age.has_value());
    REQUIRE_THAT(*label.fh_change_age, Catch::Matchers::WithinAbs(1974.0 - 1950.0, 1e-12));

    // invariant to relative ordering
    Family swapped("h2", {main, sister, mother});
    const FhLabel label2 = fh_indicator(swapped, 0);
    REQUIRE(label2.fh_end == 1);
    REQUIRE_THAT(*label2.fh_change_age, Catch::Matchers::WithinAbs(*label.fh_change_age, 0.0));
}

TEST_CASE("fh ignores the main subject's own event") {
    SubjectRecord main(45.0, 1, Role::main);
    SubjectRecord sister(40.0, 0, Role::sister);
    Family f("i", {main, sister});
    REQUIRE(fh_indicator(f, 0).fh_end == 0);
}

TEST_CASE("fh with all relatives censored") {
    Family f("j", {SubjectRecord(45.0, 0, Role::main), SubjectRecord(70.0, 0, Role::mother)});
    const FhLabel label = fh_indicator(f, 0);
    REQUIRE(label.fh_end == 0);
    REQUIRE_FALSE(label.fh_change_age.has_value());
}

TEST_CASE("relative event before the main subject's birth flips fh at age zero") {
    SubjectRecord main(45.0, 0, Role::main);
    main.birth_year = 1950.0;
    SubjectRecord mother(8.0, 1, Role::mother);
    mother.birth_year = 1920.0;
    mother.event_year = 1928.0;
    Family f("k", {main, mother});
    const FhLabel label = fh_indicator(f, 0);
    REQUIRE(label.fh_end == 1);
    REQUIRE(*label.fh_change_age == 0.0);
}

TEST_CASE("fh requires a main subject") {
    Family f("l", {SubjectRecord(45.0, 0, Role::sister)});
    REQUIRE_THROWS_AS(fh_indicator(f), std::invalid_argument);
    REQUIRE_THROWS_AS(FhLabel(0, 12.0), std::invalid_argument);
}

TEST_CASE("csv round trip preserves everything") {
    SubjectRecord main(45.25, 0, Role::main);
    main.birth_year = 1950.5;
    SubjectRecord mother(52.125, 1, Role::mother);
    mother.birth_year = 1922.25;
    mother.event_year = 1974.375;
    Family f1("0", {main, mother}, 1.75);
    Family f2("1", {SubjectRecord(33.5, 1, Role::main)}, 0.25);
    f2.members[0].birth_year = 1960.0;
    f2.members[0].event_year = 1993.5;
    std::vector<Family> fams{f1, f2};

    std::ostringstream os;
    write_families_csv(os, fams);
    std::istringstream is(os.str());
    const auto back = read_families_csv(is, "mem");

    REQUIRE(back.size() == 2);
    REQUIRE(back[0].id == "0");
    REQUIRE(back[0].members.size() == 2);
    REQUIRE(back[0].members[1].x == 52.125);
    REQUIRE(back[0].members[1].delta == 1);
    REQUIRE(back[0].members[1].role == Role::mother);
    REQUIRE(back[0].members[1].birth_year == 1922.25);
    REQUIRE(back[0].members[1].event_year == 1974.375);
    REQUIRE(back[0].true_frailty == 1.75);
    REQUIRE_FALSE(back[0].members[0].event_year.has_value());
    REQUIRE(back[1].true_frailty == 0.25);

    // a second serialization is byte-identical
    std::ostringstream os2;
    write_families_csv(os2, back);
    REQUIRE(os2.str() == os.str());
}

TEST_CASE("csv parse errors carry line numbers") {
    {
        std::istringstream is("family_id,subject_id,role,age\n");
        REQUIRE_THROWS_WITH(read_families_csv(is, "t"), Catch::Matchers::ContainsSubstring("t:1:"));
    }
    {
        std::istringstream is("family_id,subject_id,role,age,event\n0,0,main,45,2\n");
        REQUIRE_THROWS_WITH(read_families_csv(is, "t"), Catch::Matchers::ContainsSubstring("t:2:"));
    }
    {
        std::istringstream is("family_id,subject_id,role,age,event\n0,0,main,45,1\n0,1,duchess,50,0\n");
        REQUIRE_THROWS_WITH(read_families_csv(is, "t"), Catch::Matchers::ContainsSubstring("t:3:"));
    }
    {
        std::istringstream is("family_id,subject_id,role,age,event\n0,0,main,oops,1\n");
        REQUIRE_THROWS_WITH(read_families_csv(is, "t"), Catch::Matchers::ContainsSubstring("bad age"));
    }
    {
        std::istringstream is("family_id,subject_id,role,age,event\n");
        REQUIRE_THROWS_WITH(read_families_csv(is, "t"), Catch::Matchers::ContainsSubstring("no data rows"));
    }
}

TEST_CASE("param set validation") {
    REQUIRE_THROWS_AS(ParamSet(0.0, 0.5, Weibull(8.0, 6.0)), std::invalid_argument);
    REQUIRE_THROWS_AS(ParamSet(1.0, 1.0, Weibull(8.0, 6.0)), std::invalid_argument);
    const ParamSet pi(2.0, 0.9, Weibull(8.0, 6.0));
    REQUIRE(pi.cure().p == 0.9);
}
