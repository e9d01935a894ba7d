#pragma once

#include <cstring>
#include <memory>

#include "minivella/runtime.hpp"
#include "minivella/target.hpp"

namespace mv::vm {

// Every register is one 16-byte slot. Values larger than two eightbytes
// (Int256, ByStrX with X > 16) are held by reference.
struct Slot {
    uint64_t a = 0, b = 0;
};

// Bump allocator with allocation instrumentation (sizes are recorded so the
// layout tests can observe exact cell sizes).
struct Arena {
    std::vector<std::unique_ptr<uint8_t[]>> chunks;
    uint8_t* cur = nullptr;
    size_t left = 0;
    size_t chunk_size = 1 << 20;

    uint64_t alloc_count = 0;
    uint64_t alloc_bytes = 0;
    bool record_cells = false;
    std::vector<uint32_t> cell_sizes;  // ADT cell allocations only

    uint8_t* alloc(size_t n) {
        n = n ? n : 1;
        if (n > left) {
            size_t sz = std::max(chunk_size, n);
            chunks.push_back(std::make_unique<uint8_t[]>(sz));
            cur = chunks.back().get();
            left = sz;
        }
        uint8_t* p = cur;
        cur += n;
        left -= n;
        ++alloc_count;
        alloc_bytes += n;
        return p;
    }

    uint8_t* alloc_cell(size_t n) {
        if (record_cells) cell_sizes.push_back((uint32_t)n);
        return alloc(n);
    }
};

struct TxResult {
    std::vector<rt::MsgPtr> messages;
    std::vector<rt::MsgPtr> events;
};

// Pre-resolved executable form of a TargetModule plus its execution state.
class Machine {
public:
    Machine(const tgt::TargetModule& mod, rt::Limits limits);
    ~Machine();

    // evaluates globals (and, for contracts, nothing else)
    void init();

    // expression programs
    rt::RValPtr run_main();

    // contract programs
    void set_state(rt::StateStore st);
    rt::StateStore& state();
    TxResult run_transition(const std::string& name,
                            const std::vector<rt::RValPtr>& args);
    void run_field_inits();  // deploy: compute declared initial state

    Arena& arena();
    uint64_t steps() const;

    const tgt::TargetModule& module() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl;
};

}  // namespace mv::vm
