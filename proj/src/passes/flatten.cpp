#include "minivella/passes.hpp"
#include "pass_internal.hpp"

namespace mv::passes {

namespace {

// Classic pattern-matrix compilation. A non-flat match is rewritten into a
// tree of flat matches over fresh scrutinee variables ($m0, $m1, ...). The
// algorithm is generic over the arm body representation, so the same code
// handles expression matches and statement matches.

struct Flattener {
    const AdtRegistry& reg;
    std::set<std::string> used;
    int counter = 0;

    std::string fresh() {
        for (;;) {
            std::string n = "$m" + std::to_string(counter++);
            if (!used.count(n)) {
                used.insert(n);
                return n;
            }
        }
    }

    template <class Body>
    struct Row {
        std::vector<PatternPtr> pats;
        Body body;
    };

    // Body-specific operations.
    static ExprPtr rename(const ExprPtr& b, const std::string& from,
                          const std::string& to) {
        return subst_var(b, from, to);
    }
    static std::vector<StmtPtr> rename(const std::vector<StmtPtr>& b,
                                       const std::string& from,
                                       const std::string& to) {
        return subst_var_stmts(b, from, to);
    }
    static ExprPtr wrap_match(const std::string& scrut,
                              std::vector<MatchArm> arms, SourceLoc loc) {
        auto m = make_expr(ExprKind::Match, loc);
        m->name = scrut;
        m->arms = std::move(arms);
        return m;
    }

    template <class Body>
    Body compile(std::vector<std::string> occs, std::vector<Row<Body>> rows,
                 SourceLoc loc) {
        if (rows.empty())
            throw CompileError(
                "internal: empty pattern matrix (match not exhaustive?)", loc);

        // drop leading columns that carry no constructor pattern
        size_t col = 0;
        while (col < occs.size()) {
            bool has_ctor = false;
            for (auto& r : rows)
                if (r.pats[col]->kind == Pattern::Kind::Ctor) has_ctor = true;
            if (has_ctor) break;
            for (auto& r : rows)
                if (r.pats[col]->kind == Pattern::Kind::Binder)
                    r.body = rename(r.body, r.pats[col]->name, occs[col]);
            ++col;
        }
        if (col == occs.size()) return rows.front().body;

        // branch on occs[col]
        auto [decl, idx0] = reg.find_ctor([&] {
            for (auto& r : rows)
                if (r.pats[col]->kind == Pattern::Kind::Ctor)
                    return r.pats[col]->name;
            return std::string();
        }());
        (void)idx0;
        if (!decl)
            throw CompileError("internal: unknown constructor in match", loc);

        std::vector<std::pair<PatternPtr, Body>> arms;
        for (auto& ctor : decl->ctors) {
            size_t nfields = ctor.field_types.size();
            std::vector<std::string> binders;
            std::vector<PatternPtr> flat_subs;
            for (size_t i = 0; i < nfields; ++i) {
                binders.push_back(fresh());
                flat_subs.push_back(Pattern::binder(binders.back(), loc));
            }

            std::vector<std::string> sub_occs(occs.begin(),
                                              occs.begin() + col);
            sub_occs.insert(sub_occs.end(), binders.begin(), binders.end());
            sub_occs.insert(sub_occs.end(), occs.begin() + col + 1,
                            occs.end());

            std::vector<Row<Body>> sub_rows;
            for (auto& r : rows) {
                const PatternPtr& p = r.pats[col];
                std::vector<PatternPtr> np(r.pats.begin(),
                                           r.pats.begin() + col);
                Body body = r.body;
                if (p->kind == Pattern::Kind::Ctor) {
                    if (p->name != ctor.name) continue;
                    np.insert(np.end(), p->subs.begin(), p->subs.end());
                } else {
                    if (p->kind == Pattern::Kind::Binder)
                        body = rename(body, p->name, occs[col]);
                    for (size_t i = 0; i < nfields; ++i)
                        np.push_back(Pattern::wildcard(loc));
                }
                np.insert(np.end(), r.pats.begin() + col + 1, r.pats.end());
                sub_rows.push_back({std::move(np), std::move(body)});
            }
            if (sub_rows.empty())
                throw CompileError(
                    "internal: match misses constructor " + ctor.name, loc);
            Body arm_body = compile<Body>(sub_occs, std::move(sub_rows), loc);
            arms.emplace_back(Pattern::ctor(ctor.name, std::move(flat_subs), loc),
                              std::move(arm_body));
        }
        return make_match<Body>(occs[col], std::move(arms), loc);
    }

    template <class Body>
    Body make_match(const std::string&, std::vector<std::pair<PatternPtr, Body>>,
                    SourceLoc);

    // --- expression traversal ---

    ExprPtr flatten(const ExprPtr& e) {
        if (!e) return nullptr;
        auto c = std::make_shared<Expr>(*e);
        c->a = flatten(e->a);
        c->b = flatten(e->b);
        for (auto& a : c->args) a = flatten(a);
        for (auto& f : c->fields) f.value = flatten(f.value);
        for (auto& ent : c->entries) ent.body = flatten(ent.body);
        for (auto& arm : c->arms) arm.body = flatten(arm.body);

        if (c->kind != ExprKind::Match) return c;
        bool flat = true;
        for (auto& arm : c->arms)
            if (!pattern_is_flat(arm.pat)) flat = false;
        if (flat) return c;

        std::vector<Row<ExprPtr>> rows;
        for (auto& arm : c->arms)
            rows.push_back({{arm.pat}, arm.body});
        return compile<ExprPtr>({c->name}, std::move(rows), c->loc);
    }

    std::vector<StmtPtr> flatten_stmts(const std::vector<StmtPtr>& body) {
        std::vector<StmtPtr> out;
        for (auto& s : body) {
            auto c = std::make_shared<Stmt>(*s);
            if (c->e) c->e = flatten(c->e);
            if (c->e2) c->e2 = flatten(c->e2);
            if (c->kind == StmtKind::MatchStmt) {
                for (auto& arm : c->arms) arm.body = flatten_stmts(arm.body);
                bool flat = true;
                for (auto& arm : c->arms)
                    if (!pattern_is_flat(arm.pat)) flat = false;
                if (!flat) {
                    std::vector<Row<std::vector<StmtPtr>>> rows;
                    for (auto& arm : c->arms)
                        rows.push_back({{arm.pat}, arm.body});
                    auto repl = compile<std::vector<StmtPtr>>(
                        {c->name}, std::move(rows), c->loc);
                    out.insert(out.end(), repl.begin(), repl.end());
                    continue;
                }
            }
            out.push_back(std::move(c));
        }
        return out;
    }
};

template <>
ExprPtr Flattener::make_match<ExprPtr>(
    const std::string& scrut, std::vector<std::pair<PatternPtr, ExprPtr>> arms,
    SourceLoc loc) {
    std::vector<MatchArm> as;
    for (auto& [p, b] : arms) as.push_back({p, b});
    return wrap_match(scrut, std::move(as), loc);
}

template <>
std::vector<StmtPtr> Flattener::make_match<std::vector<StmtPtr>>(
    const std::string& scrut,
    std::vector<std::pair<PatternPtr, std::vector<StmtPtr>>> arms,
    SourceLoc loc) {
    auto m = std::make_shared<Stmt>();
    m->kind = StmtKind::MatchStmt;
    m->loc = loc;
    m->name = scrut;
    for (auto& [p, b] : arms) m->arms.push_back({p, std::move(b)});
    return {std::move(m)};
}

}  // namespace

void flatten_matches(Program& p) {
    AdtRegistry reg(p);
    Flattener fl{reg, {}, 0};
    collect_program_names(p, fl.used);
    for (auto& d : p.defs) d.value = fl.flatten(d.value);
    if (p.contract) {
        for (auto& f : p.contract->fields) f.init = fl.flatten(f.init);
        for (auto& t : p.contract->transitions)
            t.body = fl.flatten_stmts(t.body);
    }
    if (p.main) p.main = fl.flatten(p.main);
    reannotate(p);
}

}  // namespace mv::passes
