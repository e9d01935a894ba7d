#pragma once

#include <functional>
#include <memory>

#include "minivella/ast.hpp"
#include "minivella/runtime.hpp"

// Reference interpreter: a direct environment-passing tree walker. It is the
// semantic oracle for the compiled VM and deliberately favours obviousness
// over speed. It can run a program at any pipeline stage (it understands the
// post-uncurry and post-monomorphization forms too).

namespace mv::interp {

struct TxResult {
    std::vector<rt::MsgPtr> messages;
    std::vector<rt::MsgPtr> events;
};

class Interp {
public:
    Interp(const Program& p, rt::Limits limits);
    ~Interp();

    void init();  // evaluate library definitions

    rt::RValPtr run_main();

    void set_state(rt::StateStore st);
    rt::StateStore& state();
    void run_field_inits();
    TxResult run_transition(const std::string& name,
                            const std::vector<rt::RValPtr>& args);

    uint64_t steps() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl;
};

// Runs fn on a thread with a large stack: the interpreter's recursion depth
// is proportional to program recursion depth.
void run_big_stack(const std::function<void()>& fn,
                   size_t stack_bytes = 512u << 20);

}  // namespace mv::interp
