//! Small CSV builder with `\n` line endings.

use fluency_core::{Error, Result};

pub struct CsvOut {
    writer: csv::Writer<Vec<u8>>,
    error: Option<csv::Error>,
}

impl CsvOut {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let error = writer.write_record(header).err();
        CsvOut { writer, error }
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, fields: &[S]) {
        if self.error.is_none() {
            self.error = self.writer.write_record(fields).err();
        }
    }

    pub fn finish(self) -> Result<Vec<u8>> {
        if let Some(e) = self.error {
            return Err(Error::Validation(format!("CSV output: {e}")));
        }
        self.writer
            .into_inner()
            .map_err(|e| Error::Validation(format!("CSV output: {e}")))
    }
}
