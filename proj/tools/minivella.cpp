#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "minivella/pipeline.hpp"

#include "CLI11.hpp"

using namespace mv;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_diags(const std::string& file, const CompileError& e) {
    for (auto& d : e.diags)
        std::cerr << format_diagnostic(file, d) << "\n";
}

bool is_mvir(const std::string& path) {
    return path.size() > 5 && path.substr(path.size() - 5) == ".mvir";
}

struct RunOpts {
    std::string state_file, message_file;
    uint64_t step_limit = rt::Limits{}.step_limit;
    uint64_t stack_limit = rt::Limits{}.stack_limit;

    rt::Limits limits() const { return {step_limit, stack_limit}; }
};

void add_run_opts(CLI::App* cmd, RunOpts& o) {
    cmd->add_option("--state", o.state_file, "contract state JSON file");
    cmd->add_option("--message", o.message_file, "incoming message JSON file");
    cmd->add_option("--step-limit", o.step_limit, "execution step limit");
    cmd->add_option("--stack-limit", o.stack_limit, "call stack frame limit");
}

int output_and_exit_code(const ordered_json& j) {
    std::cout << j.dump(2) << "\n";
    return j.contains("error") ? 1 : 0;
}

ordered_json run_vm(const tgt::TargetModule& mod, const RunOpts& o) {
    if (mod.contract) {
        if (o.message_file.empty())
            throw std::runtime_error("contract runs need --message");
        nlohmann::json msg = nlohmann::json::parse(read_file(o.message_file));
        std::optional<nlohmann::json> state;
        if (!o.state_file.empty())
            state = nlohmann::json::parse(read_file(o.state_file));
        return pipeline::run_contract_vm(mod, state ? &*state : nullptr, msg,
                                         o.limits());
    }
    return pipeline::run_expr_vm(mod, o.limits());
}

ordered_json run_interp(const Program& checked, const RunOpts& o) {
    ordered_json out;
    interp::run_big_stack([&] {
        if (checked.contract) {
            if (o.message_file.empty())
                throw std::runtime_error("contract runs need --message");
            nlohmann::json msg = nlohmann::json::parse(read_file(o.message_file));
            std::optional<nlohmann::json> state;
            if (!o.state_file.empty())
                state = nlohmann::json::parse(read_file(o.state_file));
            out = pipeline::run_contract_interp(
                checked, state ? &*state : nullptr, msg, o.limits());
        } else {
            out = pipeline::run_expr_interp(checked, o.limits());
        }
    });
    return out;
}

double median_ms(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return xs[xs.size() / 2];
}

template <class F>
double time_ms(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minivella: a small polymorphic contract language compiler"};
    app.require_subcommand(1);

    std::string input, output, dump_after;
    RunOpts opts;
    int reps = 5;

    auto* check = app.add_subcommand("check", "parse and typecheck");
    check->add_option("file", input)->required();

    auto* compile = app.add_subcommand("compile", "compile to .mvir");
    compile->add_option("file", input)->required();
    compile->add_option("-o,--output", output, "output path (default stdout)");
    compile->add_option("--dump-after", dump_after,
                        "print the program after the named pass");

    auto* run = app.add_subcommand("run", "compile and execute on the VM");
    run->add_option("file", input, "source file or .mvir module")->required();
    add_run_opts(run, opts);

    auto* itp = app.add_subcommand("interp", "execute with the reference "
                                             "interpreter");
    itp->add_option("file", input)->required();
    add_run_opts(itp, opts);

    auto* bench = app.add_subcommand("bench", "time the VM against the "
                                              "interpreter");
    bench->add_option("file", input)->required();
    bench->add_option("--reps", reps, "repetitions (median is reported)");
    add_run_opts(bench, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 64;
    }

    try {
        if (check->parsed()) {
            pipeline::frontend(read_file(input));
            std::cout << "ok\n";
            return 0;
        }
        if (compile->parsed()) {
            Program p = pipeline::frontend(read_file(input));
            std::string dump;
            tgt::TargetModule mod =
                pipeline::compile(p, dump_after, &dump);
            std::string text =
                dump_after.empty() ? tgt::emit_text(mod) : dump;
            if (output.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(output, std::ios::binary);
                out << text;
            }
            return 0;
        }
        if (run->parsed()) {
            tgt::TargetModule mod =
                is_mvir(input)
                    ? tgt::parse_text(read_file(input))
                    : pipeline::compile(pipeline::frontend(read_file(input)));
            return output_and_exit_code(run_vm(mod, opts));
        }
        if (itp->parsed()) {
            Program p = pipeline::frontend(read_file(input));
            return output_and_exit_code(run_interp(p, opts));
        }
        if (bench->parsed()) {
            Program p = pipeline::frontend(read_file(input));
            tgt::TargetModule mod = pipeline::compile(p);
            ordered_json vm_out, in_out;
            std::vector<double> vm_ms, in_ms;
            for (int i = 0; i < reps; ++i) {
                vm_ms.push_back(time_ms([&] { vm_out = run_vm(mod, opts); }));
                in_ms.push_back(
                    time_ms([&] { in_out = run_interp(p, opts); }));
            }
            ordered_json j;
            j["interp_ms"] = median_ms(in_ms);
            j["vm_ms"] = median_ms(vm_ms);
            j["speedup"] = median_ms(in_ms) / median_ms(vm_ms);
            j["equal"] = vm_out == in_out;
            std::cout << j.dump(2) << "\n";
            return vm_out == in_out ? 0 : 1;
        }
    } catch (const CompileError& e) {
        print_diags(input, e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 64;
}
