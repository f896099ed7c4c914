//! Dataset ingestion, preprocessing, synthetic data and chain files.

mod chain;
mod csv_data;
mod synthetic;

pub use chain::{load_chain, read_chain, serialize_chain, write_chain, ChainHeader, ChainRecord, CHAIN_FORMAT, CHAIN_VERSION};
pub use csv_data::{
    binarize_median, load_csv, load_dataset, split_by_group, standardize, standardize_dataset, write_dataset_csv,
    DatasetSource, DatasetSpec, LoadedData, Preprocess,
};
pub use synthetic::{generate_mixture, generate_toy, TOY_GROUP1_MEANS, TOY_GROUP0_MEANS};
