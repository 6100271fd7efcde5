/// Binds `$g` to the concrete group a [`GroupDescriptor`](crate::group::GroupDescriptor) names
/// and evaluates `$body` once per possible type. The enclosing function must return
/// [`Result`](crate::Result).
macro_rules! with_group {
    ($desc:expr, |$g:ident| $body:expr) => {{
        use $crate::group::Family;
        use $crate::rings::AnyRing;
        let desc: &$crate::group::GroupDescriptor = $desc;
        let d = desc.d.unwrap_or(0) as usize;
        match (desc.family, AnyRing::new(&desc.ring)?) {
            (Family::Nottingham, _) => {
                let $g = $crate::nottingham::Nottingham::new(desc.ring.q, desc.ring.truncation)?;
                $body
            }
            (Family::Additive, AnyRing::Padic(r)) => {
                let $g = $crate::additive::AdditiveGroup::new(r);
                $body
            }
            (Family::Additive, AnyRing::Series(r)) => {
                let $g = $crate::additive::AdditiveGroup::new(r);
                $body
            }
            (family, AnyRing::Padic(r)) => {
                let $g = $crate::matgroups::MatrixGroup::new(family, d, r)?;
                $body
            }
            (family, AnyRing::Series(r)) => {
                let $g = $crate::matgroups::MatrixGroup::new(family, d, r)?;
                $body
            }
        }
    }};
}

/// Binds `$r` to the concrete ring a [`RingDescriptor`](crate::rings::RingDescriptor) names.
macro_rules! with_ring {
    ($desc:expr, |$r:ident| $body:expr) => {{
        match $crate::rings::AnyRing::new($desc)? {
            $crate::rings::AnyRing::Padic($r) => $body,
            $crate::rings::AnyRing::Series($r) => $body,
        }
    }};
}
