use alloc::collections::BTreeMap;
use alloc::sync::Arc;

use serde::Serialize;

use crate::airport::AirportModel;
use crate::clearance::{Clearance, Mobile, MobileError};
use crate::ids::MobileId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("mobile {0} already exists")]
    DuplicateMobile(MobileId),
    #[error("unknown mobile {0}")]
    UnknownMobile(MobileId),
    #[error("mobile {id}: {source}")]
    InvalidMobile { id: MobileId, source: MobileError },
}

/// All mobiles on one airport. Every mobile in a `World` passed
/// [`Mobile::validate`] on the way in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct World {
    #[serde(skip)]
    model: Arc<AirportModel>,
    mobiles: BTreeMap<MobileId, Mobile>,
}

impl World {
    pub fn new(model: Arc<AirportModel>) -> Self {
        World {
            model,
            mobiles: BTreeMap::new(),
        }
    }

    pub fn model(&self) -> &AirportModel {
        &self.model
    }

    pub fn shared_model(&self) -> &Arc<AirportModel> {
        &self.model
    }

    fn check(&self, mobile: &Mobile) -> Result<(), WorldError> {
        mobile
            .validate(&self.model)
            .map_err(|source| WorldError::InvalidMobile {
                id: mobile.id.clone(),
                source,
            })
    }

    pub fn add(&mut self, mobile: Mobile) -> Result<(), WorldError> {
        if self.mobiles.contains_key(&mobile.id) {
            return Err(WorldError::DuplicateMobile(mobile.id));
        }
        self.check(&mobile)?;
        self.mobiles.insert(mobile.id.clone(), mobile);
        Ok(())
    }

    /// Replaces an existing mobile, returning the previous record.
    pub fn replace(&mut self, mobile: Mobile) -> Result<Mobile, WorldError> {
        if !self.mobiles.contains_key(&mobile.id) {
            return Err(WorldError::UnknownMobile(mobile.id));
        }
        self.check(&mobile)?;
        Ok(self.mobiles.insert(mobile.id.clone(), mobile).expect("checked above"))
    }

    pub fn remove(&mut self, id: &MobileId) -> Option<Mobile> {
        self.mobiles.remove(id)
    }

    pub fn get(&self, id: &MobileId) -> Option<&Mobile> {
        self.mobiles.get(id)
    }

    pub fn contains(&self, id: &MobileId) -> bool {
        self.mobiles.contains_key(id)
    }

    /// Mobiles in id order.
    pub fn mobiles(&self) -> impl Iterator<Item = &Mobile> {
        self.mobiles.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &MobileId> {
        self.mobiles.keys()
    }

    pub fn len(&self) -> usize {
        self.mobiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mobiles.is_empty()
    }

    /// Copy of the world where `id` holds `clearance`, skipping entry
    /// validation but not the record invariants.
    pub fn with_clearance(&self, id: &MobileId, clearance: Clearance) -> Result<World, WorldError> {
        let mut mobile = self
            .get(id)
            .cloned()
            .ok_or_else(|| WorldError::UnknownMobile(id.clone()))?;
        mobile.clearance = clearance;
        let mut out = self.clone();
        out.replace(mobile)?;
        Ok(out)
    }
}
