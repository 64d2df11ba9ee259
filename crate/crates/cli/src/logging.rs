use log::{Level, LevelFilter, Log, Metadata, Record};

/// stderr logger: plain `[level] message` lines or one JSON object per line.
struct StderrLogger {
    json: bool,
}

impl Log for StderrLogger {
    fn enabled(&self, _: &Metadata) -> bool {
        true
    }

    fn log(&self, record: &Record) {
        if !self.enabled(record.metadata()) {
            return;
        }
        let level = record.level().as_str().to_ascii_lowercase();
        if self.json {
            let line =
                serde_json::json!({ "level": level, "target": record.target(), "msg": record.args().to_string() });
            eprintln!("{line}");
        } else {
            eprintln!("[{level}] {}", record.args());
        }
    }

    fn flush(&self) {}
}

pub fn init(quiet: bool, json: bool) {
    let level = if quiet { LevelFilter::Warn } else { LevelFilter::Info };
    if log::set_boxed_logger(Box::new(StderrLogger { json })).is_ok() {
        log::set_max_level(level);
    }
}

/// The single line written on failure.
pub fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "level": Level::Error.as_str().to_ascii_lowercase(), "error": kind, "message": message })
        .to_string()
}
