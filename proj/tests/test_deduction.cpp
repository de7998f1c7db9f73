#include <doctest.h>

#include <functional>

#include "ipf/deduction.hpp"

using namespace ipf;

namespace {

ProofScript ps(const std::string& s) { return parse_script(s); }

FormulaPtr pf(const std::string& s, SystemId m = SystemId::IPF_I) { return parse_formula(s, m); }

std::string err_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.code;
  } catch (const KernelError& e) {
    return e.code;
  }
  return "";
}

// The star-eleven encoding; also exercised by the checker and corpus suites.
const char* kStar11 = R"=((proof star11 :system ipf-i
  (rule ie3p :conclusion (ex x (and (F x) (and (all y (imp (F y) (= y x))) (G x))))
    :eigen d :discharge (f8 e9)
    (assume m2 (I x (F x) (ex! x)))
    (rule ie1p :conclusion (ex x (and (F x) (and (all y (imp (F y) (= y x))) (G x))))
      :eigen (c b) :discharge (f4 e3 f5 g7 e6)
      (assume m1 (I x (F x) (G x)))
      (assume f8 (F (p d)))
      (assume e9 (ex! (p d)))
      (rule ie2p' :conclusion (= (p c) (p d))
        (assume m2 (I x (F x) (ex! x)))
        (assume e3 (ex! (p c)))
        (assume e9 (ex! (p d)))
        (assume f4 (F (p c)))
        (assume f8 (F (p d))))
      (rule ex-i :conclusion (ex x (and (F x) (and (all y (imp (F y) (= y x))) (G x))))
        (rule and-i :conclusion (and (F (p b)) (and (all y (imp (F y) (= y (p b)))) (G (p b))))
          (assume f5 (F (p b)))
          (rule and-i :conclusion (and (all y (imp (F y) (= y (p b)))) (G (p b)))
            (rule all-i :conclusion (all y (imp (F y) (= y (p b))))
              :eigen a :discharge (e2)
              (rule imp-i :conclusion (imp (F (p a)) (= (p a) (p b)))
                :discharge (f1)
                (rule ie2p' :conclusion (= (p a) (p b))
                  (assume m2 (I x (F x) (ex! x)))
                  (assume e2 (ex! (p a)))
                  (assume e6 (ex! (p b)))
                  (assume f1 (F (p a)))
                  (assume f5 (F (p b))))))
            (assume g7 (G (p b)))))
        (assume e6 (ex! (p b))))))))=";

}  // namespace

TEST_CASE("rule metadata") {
  CHECK(rule_name(RuleId::IE2pPrime) == "ie2p'");
  CHECK(rule_from_name("ex-e") == RuleId::ExistsE);
  CHECK(rule_from_name("eq-i") == std::nullopt);
  CHECK(rule_info(RuleId::ImpI).arity == 1);
  CHECK(rule_info(RuleId::IE1p).eigens == 2);
  CHECK(rule_info(RuleId::IE1p).discharge_slots == 5);
  CHECK(rule_info(RuleId::OrE).del_minors == std::vector<int>{1, 2});
  CHECK(is_del_rule(RuleId::IE5p));
  CHECK(!is_del_rule(RuleId::IE2p));
}

TEST_CASE("parse: assume leaf") {
  auto script = ps("(proof leaf :system ipf :decls ((p a)) (assume h (P (p a))))");
  CHECK(script.name == "leaf");
  CHECK(script.system == SystemId::IPF);
  REQUIRE(script.decls.size() == 1);
  CHECK(script.decls[0] == std::make_pair('p', std::string("a")));
  REQUIRE(script.body->node == NodeKind::Assume);
  CHECK(script.body->label == "h");
  CHECK(alpha_eq(script.body->conclusion, pf("(P (p a))", SystemId::IPF)));
}

TEST_CASE("parse: star-one right-to-left") {
  // From the exists-side half of the first starred equivalence: assume a=t
  // and E!a, conclude E!t by =E, then discharge both by exists-E.
  auto script = ps(R"=((proof star1-rtl :system ipf :decls ((c t))
    (rule ex-e :conclusion (ex! (c t)) :eigen a :discharge (i j)
      (assume h (ex y (= y (c t))))
      (rule eq-e :conclusion (ex! (c t))
        (assume i (= (p a) (c t)))
        (assume j (ex! (p a)))))))=");
  auto d = script.body;
  REQUIRE(d->node == NodeKind::Rule);
  CHECK(d->rule == RuleId::ExistsE);
  CHECK(alpha_eq(d->conclusion, pf("(ex! (c t))", SystemId::IPF)));
  CHECK(d->eigens == std::vector<std::string>{"a"});
  CHECK(d->discharges == std::vector<std::string>{"i", "j"});
  REQUIRE(d->premises.size() == 2);
  CHECK(d->premises[0]->node == NodeKind::Assume);
  CHECK(alpha_eq(d->premises[0]->conclusion, pf("(ex y (= y (c t)))", SystemId::IPF)));
  CHECK(d->premises[1]->rule == RuleId::EqE);
  CHECK(node_count(d) == 5);  // the rule pair plus three assumption leaves
  auto open = open_assumptions(d);
  REQUIRE(open.size() == 1);
  CHECK(open.count("h") == 1);
}

TEST_CASE("parse: duplicate discharge") {
  std::string text = R"=((proof dup :system ipf
    (rule and-i :conclusion (and (imp (P) (P)) (imp (P) (P)))
      (rule imp-i :conclusion (imp (P) (P)) :discharge (h) (assume h (P)))
      (rule imp-i :conclusion (imp (P) (P)) :discharge (h) (assume h (P))))))=";
  CHECK(err_code([&] { ps(text); }) == "DuplicateDischarge");
}

TEST_CASE("parse: dangling label") {
  std::string text = R"=((proof dangle :system ipf
    (rule and-i :conclusion (and (imp (Q) (P)) (P))
      (rule imp-i :conclusion (imp (Q) (P)) :discharge (h) (assume k (P)))
      (assume h (P)))))=";
  CHECK(err_code([&] { ps(text); }) == "DanglingLabel");
}

TEST_CASE("parse: a label names one formula") {
  std::string text = R"=((proof bad :system ipf
    (rule and-i :conclusion (and (P) (Q))
      (assume h (P))
      (assume h (Q)))))=";
  CHECK(err_code([&] { ps(text); }) == "SyntaxError");
  // Same formula, same label: one class with two occurrences.
  auto ok = ps(R"=((proof ok :system ipf
    (rule and-i :conclusion (and (P) (P))
      (assume h (P))
      (assume h (P)))))=");
  CHECK(open_assumptions(ok.body).size() == 1);
}

TEST_CASE("parse: vacuous discharge") {
  auto script = ps(R"=((proof vac :system ipf
    (rule imp-i :conclusion (imp (P) (Q)) :discharge (h)
      (assume k (Q)))))=");
  auto open = open_assumptions(script.body);
  REQUIRE(open.size() == 1);
  CHECK(open.count("k") == 1);
}

TEST_CASE("parse: malformed scripts") {
  CHECK(err_code([] { ps("(proof x :system nope (assume h (P)))"); }) == "SyntaxError");
  CHECK(err_code([] { ps("(proof x :system ipf (rule and-i (assume h (P))))"); }) == "SyntaxError");
  CHECK(err_code([] { ps("(proof x :system ipf (rule nosuch :conclusion (P)))"); }) == "SyntaxError");
  CHECK(err_code([] { ps("(proof x :system ipf (assume h (P)) extra)"); }) == "SyntaxError");
  CHECK(err_code([] { ps("(proof x :system ipf :decls ((c m) (p m)) (assume h (P)))"); }) ==
        "SyntaxError");
  CHECK(err_code([] { ps("(proof x :system ipf (assume h (P))"); }) == "SyntaxError");
}

TEST_CASE("parse: comments and force_system") {
  auto script = parse_script("; a remark\n(proof c ; inline\n :system ipf (assume h (P)))",
                             SystemId::IPF_I);
  CHECK(script.system == SystemId::IPF_I);
  CHECK(script.body->label == "h");
}

TEST_CASE("open assumptions: basics") {
  auto leaf = mk_assume("h", pf("(P)"));
  auto open = open_assumptions(leaf);
  REQUIRE(open.size() == 1);
  CHECK(alpha_eq(open.at("h"), pf("(P)")));

  auto script = ps(R"=((proof full :system ipf
    (rule imp-i :conclusion (imp (P) (P)) :discharge (h) (assume h (P)))))=");
  CHECK(open_assumptions(script.body).empty());
}

TEST_CASE("open assumptions: star three") {
  auto script = ps(R"=((proof star3 :system ipf-iota
    (rule ex-i :conclusion (ex y (and (all x (iff (F x) (= x y))) (G y)))
      (rule and-i :conclusion (and (all x (iff (F x) (= x (iota x (F x))))) (G (iota x (F x))))
        (rule iff-e1 :conclusion (all x (iff (F x) (= x (iota x (F x)))))
          (rule all-e :conclusion (iff (= (iota x (F x)) (iota x (F x)))
                                       (all x (iff (F x) (= x (iota x (F x))))))
            (ll x y (F x))
            (assume e (ex! (iota x (F x)))))
          (eq-refl (iota x (F x))))
        (assume g (G (iota x (F x)))))
      (assume e (ex! (iota x (F x)))))))=");
  auto open = open_assumptions(script.body);
  REQUIRE(open.size() == 2);
  CHECK(alpha_eq(open.at("e"), pf("(ex! (iota x (F x)))", SystemId::IPF_iota)));
  CHECK(alpha_eq(open.at("g"), pf("(G (iota x (F x)))", SystemId::IPF_iota)));
}

TEST_CASE("ll node") {
  auto script = ps("(proof ax :system ipf-iota (ll x y (F x)))");
  auto d = script.body;
  REQUIRE(d->node == NodeKind::LL);
  CHECK(d->ll_x == "x");
  CHECK(d->ll_y == "y");
  CHECK(alpha_eq(d->conclusion,
                 pf("(all y (iff (= (iota x (F x)) y) (all x (iff (F x) (= x y)))))",
                    SystemId::IPF_iota)));
  CHECK(open_assumptions(d).empty());
}

TEST_CASE("graft: empty class leaves the deduction alone") {
  auto d = ps("(proof g :system ipf (assume h (P)))").body;
  auto sigma = mk_assume("m", pf("(Q)"));
  CHECK(graft(d, "z", sigma) == d);
}

TEST_CASE("graft: onto a bare assumption") {
  auto d = mk_assume("h", pf("(P)", SystemId::IPF));
  auto sigma = ps(R"=((proof s :system ipf
    (rule and-el :conclusion (P) (assume m (and (P) (R))))))=").body;
  auto out = graft(d, "h", sigma);
  CHECK(equiv_mod_renaming(out, sigma));
  CHECK(print_deduction(out) == print_deduction(sigma));
}

TEST_CASE("graft: formula mismatch") {
  auto d = mk_assume("h", pf("(P)", SystemId::IPF));
  auto sigma = mk_assume("m", pf("(Q)", SystemId::IPF));
  CHECK(err_code([&] { graft(d, "h", sigma); }) == "FormulaMismatch");
}

TEST_CASE("graft: open assumption bookkeeping") {
  auto d = ps(R"=((proof g :system ipf
    (rule and-i :conclusion (and (P) (Q))
      (assume h (P))
      (assume k (Q)))))=").body;
  auto sigma = ps(R"=((proof s :system ipf
    (rule and-el :conclusion (P) (assume m (and (P) (R))))))=").body;
  auto out = graft(d, "h", sigma);
  auto open = open_assumptions(out);
  REQUIRE(open.size() == 2);
  CHECK(open.count("k") == 1);
  CHECK(alpha_eq(open.at("m"), pf("(and (P) (R))", SystemId::IPF)));
  CHECK(alpha_eq(out->conclusion, d->conclusion));
}

TEST_CASE("graft: two copies keep their classes apart") {
  auto d = ps(R"=((proof g :system ipf
    (rule and-i :conclusion (and (P) (P))
      (assume h (P))
      (assume h (P)))))=").body;
  auto sigma = ps(R"=((proof s :system ipf
    (rule imp-e :conclusion (P)
      (assume m (imp (imp (Q) (Q)) (P)))
      (rule imp-i :conclusion (imp (Q) (Q)) :discharge (n) (assume n (Q))))))=").body;
  auto out = graft(d, "h", sigma);
  auto open = open_assumptions(out);
  REQUIRE(open.size() == 1);  // the two copies of class m merge
  CHECK(open.count("m") == 1);
  // ...but the discharged class is refreshed in the second copy.
  REQUIRE(out->premises.size() == 2);
  CHECK(out->premises[0]->premises[1]->discharges[0] == "n");
  CHECK(out->premises[1]->premises[1]->discharges[0] != "n");
  // The result is still structurally well-formed: reparse its printed form.
  auto reparsed = parse_proof("(proof check :system ipf " + print_deduction(out) + ")");
  CHECK(equiv_mod_renaming(reparsed, out));
}

TEST_CASE("graft: host class renamed when it would capture") {
  // d discharges class m; sigma arrives with its own open class m carrying a
  // different formula, so the host class has to move out of the way.
  auto d = ps(R"=((proof g :system ipf
    (rule imp-i :conclusion (imp (Q) (and (P) (Q))) :discharge (m)
      (rule and-i :conclusion (and (P) (Q))
        (assume h (P))
        (assume m (Q))))))=").body;
  auto sigma = ps(R"=((proof s :system ipf
    (rule imp-e :conclusion (P)
      (assume m (imp (R) (P)))
      (assume r (R)))))=").body;
  auto out = graft(d, "h", sigma);
  auto open = open_assumptions(out);
  REQUIRE(open.size() == 2);
  CHECK(alpha_eq(open.at("m"), pf("(imp (R) (P))", SystemId::IPF)));
  CHECK(alpha_eq(open.at("r"), pf("(R)", SystemId::IPF)));
  CHECK(out->discharges[0] != "m");
  CHECK(alpha_eq(out->conclusion, d->conclusion));
  auto reparsed = parse_proof("(proof check :system ipf " + print_deduction(out) + ")");
  CHECK(equiv_mod_renaming(reparsed, out));
}

TEST_CASE("substitute_in_deduction") {
  auto xi = ps(R"=((proof xi :system ipf :decls ((c t1) (p a))
    (rule eq-e :conclusion (Q (c t1))
      (assume i (= (p a) (c t1)))
      (assume j (Q (p a))))))=").body;

  SUBCASE("replacement throughout") {
    auto out = substitute_in_deduction(xi, "a", parse_term("(c t3)", SystemId::IPF));
    CHECK(alpha_eq(out->conclusion, pf("(Q (c t1))", SystemId::IPF)));
    CHECK(alpha_eq(out->premises[0]->conclusion, pf("(= (c t3) (c t1))", SystemId::IPF)));
    CHECK(alpha_eq(out->premises[1]->conclusion, pf("(Q (c t3))", SystemId::IPF)));
  }
  SUBCASE("absent parameter: unchanged") {
    CHECK(substitute_in_deduction(xi, "zz", parse_term("(c t3)", SystemId::IPF)) == xi);
  }
  SUBCASE("identity substitution: unchanged") {
    auto out = substitute_in_deduction(xi, "a", parse_term("(p a)", SystemId::IPF));
    CHECK(print_deduction(out) == print_deduction(xi));
  }
  SUBCASE("eigenparameter capture is refused") {
    auto d = ps(R"=((proof e :system ipf :decls ((c t))
      (rule ex-e :conclusion (ex! (c t)) :eigen a :discharge (i j)
        (assume h (ex y (= y (c t))))
        (rule eq-e :conclusion (ex! (c t))
          (assume i (= (p a) (c t)))
          (assume j (ex! (p a)))))))=").body;
    CHECK(err_code([&] { substitute_in_deduction(d, "a", parse_term("(c t)", SystemId::IPF)); }) ==
          "EigenCapture");
    CHECK(err_code([&] { substitute_in_deduction(d, "b", parse_term("(p a)", SystemId::IPF)); }) ==
          "EigenCapture");
  }
  SUBCASE("open assumptions commute with substitution") {
    auto t3 = parse_term("(c t3)", SystemId::IPF);
    auto out = substitute_in_deduction(xi, "a", t3);
    auto before = open_assumptions(xi);
    auto after = open_assumptions(out);
    REQUIRE(after.size() == before.size());
    for (auto& [label, f] : before) CHECK(alpha_eq(after.at(label), substitute_param(f, "a", t3)));
  }
}

TEST_CASE("uniquify_parameters") {
  SUBCASE("already unique: identical output") {
    auto d = ps(kStar11).body;
    auto uses = eigen_uses(d);
    REQUIRE(uses.size() == 4);  // a, b, c, d each belong to one application
    for (auto& [name, n] : uses) {
      (void)name;
      CHECK(n == 1);
    }
    CHECK(uniquify_parameters(d) == d);
  }
  SUBCASE("reused eigenparameter is split into a and a-prime") {
    auto d = ps(R"=((proof r :system ipf :decls ((c t))
      (rule and-i :conclusion (and (ex! (c t)) (ex! (c t)))
        (rule ex-e :conclusion (ex! (c t)) :eigen a :discharge (i j)
          (assume h (ex y (= y (c t))))
          (rule eq-e :conclusion (ex! (c t))
            (assume i (= (p a) (c t)))
            (assume j (ex! (p a)))))
        (rule ex-e :conclusion (ex! (c t)) :eigen a :discharge (k l)
          (assume h (ex y (= y (c t))))
          (rule eq-e :conclusion (ex! (c t))
            (assume k (= (p a) (c t)))
            (assume l (ex! (p a))))))))=").body;
    auto out = uniquify_parameters(d);
    auto uses = eigen_uses(out);
    REQUIRE(uses.size() == 2);
    CHECK(uses.count("a") == 1);
    CHECK(uses.count("a'") == 1);
    // The first application keeps its name; occurrences follow their class.
    CHECK(out->premises[0]->eigens[0] == "a");
    CHECK(out->premises[1]->eigens[0] == "a'");
    CHECK(alpha_eq(out->premises[1]->premises[1]->premises[0]->conclusion,
                   pf("(= (p a') (c t))", SystemId::IPF)));
    CHECK(uniquify_parameters(out) == out);  // idempotent
  }
  SUBCASE("eigenparameter leaking into another branch is renamed") {
    auto d = ps(R"=((proof leak :system ipf :decls ((c t))
      (rule and-i :conclusion (and (ex! (c t)) (G (p a)))
        (rule ex-e :conclusion (ex! (c t)) :eigen a :discharge (i j)
          (assume h (ex y (= y (c t))))
          (rule eq-e :conclusion (ex! (c t))
            (assume i (= (p a) (c t)))
            (assume j (ex! (p a)))))
        (assume g (G (p a))))))=").body;
    auto out = uniquify_parameters(d);
    CHECK(out->premises[0]->eigens[0] == "a'");
    // The free occurrence of a stays put.
    CHECK(alpha_eq(out->premises[1]->conclusion, pf("(G (p a))", SystemId::IPF)));
    CHECK(uniquify_parameters(out) == out);
  }
}

TEST_CASE("refresh_internal") {
  auto sigma = ps(R"=((proof s :system ipf :decls ((c t))
    (rule ex-e :conclusion (ex! (c t)) :eigen a :discharge (i j)
      (assume h (ex y (= y (c t))))
      (rule eq-e :conclusion (ex! (c t))
        (assume i (= (p a) (c t)))
        (assume j (ex! (p a)))))))=").body;
  NamePool pool;
  pool.absorb(sigma);
  auto out = refresh_internal(sigma, pool);
  CHECK(out->eigens[0] == "a'");
  CHECK(out->discharges[0] == "i'");
  CHECK(out->discharges[1] == "j'");
  auto open = open_assumptions(out);
  REQUIRE(open.size() == 1);
  CHECK(open.count("h") == 1);  // open classes keep their labels
  CHECK(equiv_mod_renaming(out, sigma));
}

TEST_CASE("equiv_mod_renaming") {
  auto a = ps(kStar11).body;
  auto b = ps(kStar11).body;
  CHECK(equiv_mod_renaming(a, b));

  auto renamed = ps(R"=((proof r :system ipf :decls ((c t))
    (rule ex-e :conclusion (ex! (c t)) :eigen e :discharge (u v)
      (assume w (ex y (= y (c t))))
      (rule eq-e :conclusion (ex! (c t))
        (assume u (= (p e) (c t)))
        (assume v (ex! (p e)))))))=").body;
  auto orig = ps(R"=((proof o :system ipf :decls ((c t))
    (rule ex-e :conclusion (ex! (c t)) :eigen a :discharge (i j)
      (assume h (ex y (= y (c t))))
      (rule eq-e :conclusion (ex! (c t))
        (assume i (= (p a) (c t)))
        (assume j (ex! (p a)))))))=").body;
  CHECK(equiv_mod_renaming(orig, renamed));

  // Two labels of one deduction may not collapse onto a single label.
  auto two = mk_rule(RuleId::AndI, pf("(and (P) (Q))", SystemId::IPF),
                     {mk_assume("h", pf("(P)", SystemId::IPF)),
                      mk_assume("k", pf("(Q)", SystemId::IPF))},
                     {}, {});
  auto one = mk_rule(RuleId::AndI, pf("(and (P) (Q))", SystemId::IPF),
                     {mk_assume("h", pf("(P)", SystemId::IPF)),
                      mk_assume("h", pf("(Q)", SystemId::IPF))},
                     {}, {});
  CHECK(!equiv_mod_renaming(two, one));
  CHECK(!equiv_mod_renaming(orig, a));
}

TEST_CASE("printing round-trips") {
  for (const char* text : {kStar11,
                           "(proof leaf :system ipf :decls ((p a)) (assume h (P (p a))))",
                           "(proof ax :system ipf-iota (ll x y (and (F x) (G x))))"}) {
    auto script = ps(text);
    auto printed = print_script(script);
    auto again = parse_script(printed);
    CHECK(again.system == script.system);
    CHECK(equiv_mod_renaming(again.body, script.body));
    CHECK(print_script(again) == printed);
  }
}

TEST_CASE("positions") {
  auto d = ps(kStar11).body;
  CHECK(position_string({}) == "root");
  CHECK(position_string({1, 4, 0}) == "1.4.0");
  auto sub = subtree_at(d, {1, 3});
  CHECK(sub->rule == RuleId::IE2pPrime);
  auto replaced = replace_at(d, {1, 3}, mk_assume("z", sub->conclusion));
  CHECK(subtree_at(replaced, {1, 3})->node == NodeKind::Assume);
  CHECK(subtree_at(d, {1, 3})->node == NodeKind::Rule);  // original untouched
  CHECK_THROWS_AS(subtree_at(d, {9}), std::out_of_range);
}
