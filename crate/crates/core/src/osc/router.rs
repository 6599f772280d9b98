use super::OscMessage;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RouteError {
    #[error("address pattern must begin with '/': {0:?}")]
    BadPattern(String),
}

/// Literal address bindings. Several bindings on one address fire in the
/// order they were registered.
#[derive(Clone, Debug)]
pub struct OscRouter<T> {
    bindings: Vec<(String, T)>,
}

impl<T> Default for OscRouter<T> {
    fn default() -> Self {
        Self { bindings: Vec::new() }
    }
}

impl<T> OscRouter<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, address: &str, target: T) -> Result<(), RouteError> {
        if !address.starts_with('/') {
            return Err(RouteError::BadPattern(address.to_string()));
        }
        self.bindings.push((address.to_string(), target));
        Ok(())
    }

    /// Targets bound to the message's address. Unbound addresses are logged
    /// and yield nothing.
    pub fn dispatch(&self, msg: &OscMessage) -> Vec<&T> {
        let hits: Vec<&T> = self
            .bindings
            .iter()
            .filter(|(a, _)| *a == msg.address)
            .map(|(_, t)| t)
            .collect();
        if hits.is_empty() {
            log::info!("dropping osc message for unbound address {}", msg.address);
        }
        hits
    }

    pub fn bindings(&self) -> &[(String, T)] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_match_in_binding_order() {
        let mut r = OscRouter::new();
        r.bind("/cue/1", "x").unwrap();
        r.bind("/cue/1", "y").unwrap();
        r.bind("/cue/10", "z").unwrap();
        assert_eq!(r.dispatch(&OscMessage::new("/cue/1", vec![])), vec![&"x", &"y"]);
        assert!(r.dispatch(&OscMessage::new("/cue/2", vec![])).is_empty());
        assert!(r.dispatch(&OscMessage::new("/cue/*", vec![])).is_empty());
        assert_eq!(r.bind("cue", "w"), Err(RouteError::BadPattern("cue".into())));
    }
}
