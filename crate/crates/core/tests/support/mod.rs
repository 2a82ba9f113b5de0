pub mod oracle;
pub mod ptdf_oracle;
pub mod uc_oracle;
