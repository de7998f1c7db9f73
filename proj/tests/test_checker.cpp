#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ipf/checker.hpp"

using namespace ipf;

namespace {

ProofScript ps(const std::string& s) { return parse_script(s); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string corpus(const std::string& rel) { return std::string(IPF_CORPUS_DIR) + "/" + rel; }

// From a unique existent to a witness of uniqueness-by-identity. The bare
// identity step F_b, a=b |- F_a needs an explicit symmetry detour (eq-refl
// plus two eq-e) because eq-e replaces left by right only.
const char* kStar12 = R"=((proof star12 :system ipf-i
  (rule ie3p :conclusion (ex y (all x (iff (F x) (= x y))))
    :eigen b :discharge (f5 e4)
    (assume m (I x (F x) (ex! x)))
    (rule ex-i :conclusion (ex y (all x (iff (F x) (= x y))))
      (rule all-i :conclusion (all x (iff (F x) (= x (p b))))
        :eigen a :discharge (e3)
        (rule iff-i :conclusion (iff (F (p a)) (= (p a) (p b)))
          :discharge (f1 q2)
          (rule ie2p' :conclusion (= (p a) (p b))
            (assume m (I x (F x) (ex! x)))
            (assume e3 (ex! (p a)))
            (assume e4 (ex! (p b)))
            (assume f1 (F (p a)))
            (assume f5 (F (p b))))
          (rule eq-e :conclusion (F (p a))
            (rule eq-e :conclusion (= (p b) (p a))
              (assume q2 (= (p a) (p b)))
              (eq-refl (p a)))
            (assume f5 (F (p b))))))
      (assume e4 (ex! (p b)))))))=";

// The converse: a unique satisfier yields the binary description form.
const char* kStar13 = R"=((proof star13 :system ipf-i
  (rule ex-e :conclusion (I x (F x) (ex! x))
    :eigen a :discharge (u3 e4)
    (assume n (ex y (all x (iff (F x) (= x y)))))
    (rule ii :conclusion (I x (F x) (ex! x))
      :eigen b :discharge (f2 e1)
      (rule iff-e2 :conclusion (F (p a))
        (rule all-e :conclusion (iff (F (p a)) (= (p a) (p a)))
          (assume u3 (all x (iff (F x) (= x (p a)))))
          (assume e4 (ex! (p a))))
        (eq-refl (p a)))
      (assume e4 (ex! (p a)))
      (assume e4 (ex! (p a)))
      (rule iff-e1 :conclusion (= (p b) (p a))
        (rule all-e :conclusion (iff (F (p b)) (= (p b) (p a)))
          (assume u3 (all x (iff (F x) (= x (p a)))))
          (assume e1 (ex! (p b))))
        (assume f2 (F (p b))))))))=";

// Smallest honest ie1p' application: existence flows out of the restrictor.
const char* kMiniIE1pPrime = R"=((proof mini :system ipf-i
  (rule ie1p' :conclusion (ex x (F x)) :eigen a :discharge (hf hg he)
    (assume m1 (I x (F x) (G x)))
    (assume m2 (I x (F x) (ex! x)))
    (rule ex-i :conclusion (ex x (F x))
      (assume hf (F (p a)))
      (assume he (ex! (p a)))))))=";

bool macro_free(const DeductionPtr& d) {
  if (!d) return true;
  if (d->node == NodeKind::Rule &&
      (d->rule == RuleId::IE1pPrime || d->rule == RuleId::IE2pPrime ||
       d->rule == RuleId::IE4pPrime))
    return false;
  for (const auto& p : d->premises)
    if (!macro_free(p)) return false;
  return true;
}

std::string diag_text(const CheckReport& report) {
  std::string out;
  for (const auto& d : report.diagnostics)
    out += position_string(d.position) + " " + d.code + ": " + d.message + "\n";
  return out;
}

void check_valid(const char* text) {
  auto script = ps(text);
  auto report = check(script.body, script.system);
  CAPTURE(script.name);
  auto diags = diag_text(report);
  CAPTURE(diags);
  CHECK(report.valid);
  CHECK(report.diagnostics.empty());
}

}  // namespace

TEST_CASE("star12 checks under the I system") { check_valid(kStar12); }

TEST_CASE("star13 checks under the I system") { check_valid(kStar13); }

TEST_CASE("star13 reuses one assumption class three times") {
  auto d = ps(kStar13).body;
  auto opens = open_assumptions(d);
  REQUIRE(opens.size() == 1);
  CHECK(opens.count("n") == 1);
}

TEST_CASE("I rules are rejected outside the I systems") {
  auto d = ps(kStar13).body;
  auto report = check(d, SystemId::IPF);
  CHECK_FALSE(report.valid);
  REQUIRE(report.diagnostics.size() == 1);
  CHECK(report.diagnostics[0].code == "RuleNotInSystem");
  CHECK(report.diagnostics[0].message.find("ii") != std::string::npos);
}

TEST_CASE("every mutant fails with exactly its documented code") {
  auto manifest = nlohmann::json::parse(read_file(corpus("manifest.json")));
  REQUIRE(manifest.at("mutants").size() >= 25);
  for (const auto& m : manifest.at("mutants")) {
    std::string rel = m.at("file").get<std::string>();
    CAPTURE(rel);
    auto script = ps(read_file(corpus(rel)));
    SystemId sys = script.system;
    if (m.contains("system")) sys = system_from_string(m.at("system").get<std::string>());
    auto report = check(script.body, sys);
    CHECK_FALSE(report.valid);
    REQUIRE(report.diagnostics.size() == 1);
    CHECK(report.diagnostics[0].code == m.at("code").get<std::string>());
  }
}

TEST_CASE("diagnostics carry the position of the offending node") {
  auto d = ps(R"=((proof pos :system ipf
    (rule and-i :conclusion (and (P (c m)) (P (c m)))
      (assume h (P (c m)))
      (rule bot-e :conclusion (P (c m))
        (assume k (P (c m)))))))=")
               .body;
  auto report = check(d, SystemId::IPF);
  REQUIRE(report.diagnostics.size() == 1);
  CHECK(report.diagnostics[0].code == "WrongPremiseShape");
  CHECK(report.diagnostics[0].position == Position{1});
  CHECK(report.system == SystemId::IPF);
}

TEST_CASE("an empty deduction is rejected") {
  auto report = check(nullptr, SystemId::IPF);
  CHECK_FALSE(report.valid);
  REQUIRE(report.diagnostics.size() == 1);
  CHECK(report.diagnostics[0].code == "WrongPremiseShape");
}

TEST_CASE("a reflexivity leaf must conclude its own identity") {
  auto bad = std::make_shared<Deduction>(*mk_eqrefl(parse_term("(c m)", SystemId::IPF)));
  bad->conclusion = mk_eq(parse_term("(c m)", SystemId::IPF), parse_term("(c n)", SystemId::IPF));
  auto report = check(bad, SystemId::IPF);
  CHECK_FALSE(report.valid);
  REQUIRE(report.diagnostics.size() == 1);
  CHECK(report.diagnostics[0].code == "WrongPremiseShape");
}

TEST_CASE("identity elimination replaces any subset of occurrences") {
  auto script = [](const char* concl) {
    return std::string(R"=((proof subset :system ipf
      (rule eq-e :conclusion )=") +
           concl + R"=(
        (assume h (= (c m) (c n)))
        (assume k (R (c m) (c m))))))=";
  };
  for (const char* ok : {"(R (c m) (c n))", "(R (c n) (c m))", "(R (c n) (c n))"}) {
    CAPTURE(ok);
    CHECK(check(ps(script(ok)).body, SystemId::IPF).valid);
  }
  auto report = check(ps(script("(R (c k) (c k))")).body, SystemId::IPF);
  CHECK_FALSE(report.valid);
  REQUIRE(report.diagnostics.size() == 1);
  CHECK(report.diagnostics[0].code == "WrongPremiseShape");
}

TEST_CASE("identity elimination reaches inside description bodies") {
  check_valid(R"=((proof iota-body :system ipf-iota
    (rule eq-e :conclusion (P (iota x (R x (c n))))
      (assume h (= (c m) (c n)))
      (assume k (P (iota x (R x (c m))))))))=");
}

TEST_CASE("identity elimination can replace a whole description") {
  check_valid(R"=((proof iota-whole :system ipf-iota
    (rule eq-e :conclusion (Q (c n))
      (assume h (= (iota x (F x)) (c n)))
      (assume k (Q (iota x (F x)))))))=");
}

TEST_CASE("ie2p tolerates coinciding terms") {
  check_valid(R"=((proof degenerate :system ipf-i
    (rule ie2p :conclusion (P (c m))
      (assume h (I x (F x) (ex! x)))
      (assume e1 (ex! (c m)))
      (assume e1 (ex! (c m)))
      (assume f1 (F (c m)))
      (assume f1 (F (c m)))
      (assume k (P (c m))))))=");
}

TEST_CASE("the restricted iota system accepts one-sided description identities") {
  check_valid(R"=((proof one-sided :system ipf-iotar
    (rule eq-e :conclusion (ex! (c n))
      (assume h (= (iota x (F x)) (c n)))
      (assume k (ex! (iota x (F x)))))))=");
}

TEST_CASE("the restricted iota system accepts reflexive description identities") {
  check_valid(R"=((proof refl :system ipf-iotar (eq-refl (iota x (F x)))))=");
}

TEST_CASE("the ll axiom passes the iota restriction scan") {
  check_valid(R"=((proof ll-ok :system ipf-iotar (ll x y (F x))))=");
  check_valid(R"=((proof ll-ok2 :system ipf-iota (ll x y (and (F x) (G x)))))=");
}

TEST_CASE("the restricted I system accepts both admissible scopes") {
  check_valid(R"=((proof ir-ex :system ipf-ir (assume h (I x (F x) (ex! x)))))=");
  check_valid(R"=((proof ir-eq :system ipf-ir (assume h (I x (F x) (= x (c t))))))=");
}

TEST_CASE("macro elaboration eliminates ie2p-prime") {
  auto script = ps(kStar12);
  auto elab = elaborate_macros(script.body);
  CHECK(macro_free(elab));
  CHECK(alpha_eq(elab->conclusion, script.body->conclusion));
  auto before = open_assumptions(script.body);
  auto after = open_assumptions(elab);
  REQUIRE(after.size() == before.size());
  for (const auto& [label, formula] : before) {
    REQUIRE(after.count(label) == 1);
    CHECK(alpha_eq(after.at(label), formula));
  }
  auto report = check(elab, SystemId::IPF_I);
  auto diags = diag_text(report);
  CAPTURE(diags);
  CHECK(report.valid);
}

TEST_CASE("macro elaboration expands ie1p-prime into the three-step form") {
  auto script = ps(kMiniIE1pPrime);
  REQUIRE(check(script.body, SystemId::IPF_I).valid);
  auto elab = elaborate_macros(script.body);
  CHECK(macro_free(elab));
  REQUIRE(elab->node == NodeKind::Rule);
  CHECK(elab->rule == RuleId::IE3p);
  REQUIRE(elab->premises.size() == 2);
  const auto& body = elab->premises[1];
  REQUIRE(body->node == NodeKind::Rule);
  CHECK(body->rule == RuleId::IE1p);
  REQUIRE(body->premises.size() == 5);
  const auto& identity = body->premises[3];
  REQUIRE(identity->node == NodeKind::Rule);
  CHECK(identity->rule == RuleId::IE2p);
  CHECK(identity->premises[5]->node == NodeKind::EqRefl);
  CHECK(alpha_eq(elab->conclusion, script.body->conclusion));
  auto before = open_assumptions(script.body);
  auto after = open_assumptions(elab);
  REQUIRE(after.size() == before.size());
  for (const auto& [label, formula] : before) {
    REQUIRE(after.count(label) == 1);
    CHECK(alpha_eq(after.at(label), formula));
  }
  auto report = check(elab, SystemId::IPF_I);
  auto diags = diag_text(report);
  CAPTURE(diags);
  CHECK(report.valid);
}

TEST_CASE("macro-free deductions come back from elaboration unchanged") {
  auto d = ps(kStar13).body;
  CHECK(elaborate_macros(d) == d);
}

TEST_CASE("elaboration rejects a macro whose premises do not fit") {
  auto d = ps(R"=((proof unfit :system ipf-i
    (rule ie2p' :conclusion (= (c m) (c n))
      (assume h (I x (F x) (ex! x)))
      (assume k (P (c m)))
      (assume e2 (ex! (c n)))
      (assume f1 (F (c m)))
      (assume f2 (F (c n))))))=")
               .body;
  try {
    elaborate_macros(d);
    FAIL("expected a kernel error");
  } catch (const KernelError& e) {
    CHECK(std::string(e.code) == "NotElaborable");
  }
}
