use std::process::ExitCode;

fn main() -> ExitCode {
    let criteria = strbf_repro::evaluate_all();
    if strbf_repro::print_report(&criteria) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
