#pragma once

namespace floodgate {

/// Entry point for the command-line tool. Returns 0 on success, 1 on
/// validation or runtime failures (with a single-line machine-parseable
/// `error: <kind>: <message>` on stderr), 2 on usage errors.
int cli_main(int argc, char** argv);

}  // namespace floodgate
