use std::io::Write;

use itemset_core::db::write_fimi;
use itemset_core::evaluation::generate_samples;
use itemset_core::model::ModelFile;
use itemset_core::ItemsetModel;

use crate::{with_output, CliError, CliResult, SynthArgs};

pub(crate) fn load_model(path: &std::path::Path) -> CliResult<ItemsetModel> {
    let file = ModelFile::read(path).map_err(CliError::file(path))?;
    ItemsetModel::from_file(&file).map_err(CliError::file(path))
}

pub fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let samples = generate_samples(&model, args.transactions as usize, args.seed)?;
    let raw: Vec<Vec<u32>> = samples
        .iter()
        .map(|s| s.transaction.items().iter().map(|i| i.0).collect())
        .collect();
    with_output(args.output.as_deref(), out, |w| Ok(write_fimi(w, &raw)?))
}
